#include "ptn/episodes.hpp"

#include "ptn/calibration.hpp"
#include "ptn/graph.hpp"
#include "ptn/label_prop.hpp"
#include "ptn/mbo.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace ptn {

Method method_from_name(const std::string& name) {
    if (name == "ptn") return Method::Ptn;
    if (name == "dpn") return Method::Dpn;
    if (name == "poisson") return Method::PoissonRaw;
    if (name == "lp") return Method::Lp;
    throw config_error("unknown method '" + name + "' (expected ptn|dpn|poisson|lp)");
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Ptn: return "ptn";
        case Method::Dpn: return "dpn";
        case Method::PoissonRaw: return "poisson";
        case Method::Lp: return "lp";
    }
    return "?";
}

void EpisodeSpec::validate() const {
    if (ways < 2) throw config_error("ways must be >= 2");
    if (shots < 1) throw config_error("shots must be >= 1");
    if (queries < 1) throw config_error("queries must be >= 1");
    if (unlabeled < 0) throw config_error("unlabeled must be >= 0");
    if (num_episodes < 1) throw config_error("num_episodes must be >= 1");
}

std::vector<int> run_episode(const EpisodeData& episode, Method method,
                             const SolverConfig& config) {
    require_valid(episode);
    EpisodeData e = l2_normalize(episode);
    if (method == Method::Ptn || method == Method::Dpn) {
        e = calibrate_queries(e, cross_class_bias(e));
    }
    // K=30 on a small episode degenerates to the complete graph.
    const int k = std::min(config.knn_k, e.size() - 1);
    const SparseGraph graph = build_graph(e.feature_matrix(), k);
    Mat query_scores;
    if (method == Method::Lp) {
        query_scores = label_propagation_episode(graph, e, config);
    } else {
        query_scores = poisson_mbo_on_graph(graph, e, config, ClassPrior::uniform(e.ways));
    }
    return predict_labels(query_scores);
}

namespace {

std::mt19937_64 episode_rng(std::uint64_t seed, int episode_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(episode_index)};
    return std::mt19937_64(seq);
}

void shuffle_indices(std::vector<int>& v, std::mt19937_64& rng) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
        std::swap(v[i], v[static_cast<int>(rng() % (i + 1))]);
    }
}

EpisodeData sample_episode_impl(const FeaturePool& pool, const EpisodeSpec& spec,
                                int episode_index, std::vector<int>* query_truth) {
    spec.validate();
    if (pool.classes < spec.ways) throw data_error("pool has fewer classes than ways");
    auto rng = episode_rng(spec.seed, episode_index);

    std::vector<std::vector<int>> by_class(pool.classes);
    for (int i = 0; i < pool.size(); ++i) by_class[pool.labels[i]].push_back(i);

    std::vector<int> class_order(pool.classes);
    std::iota(class_order.begin(), class_order.end(), 0);
    shuffle_indices(class_order, rng);
    const std::vector<int> chosen(class_order.begin(), class_order.begin() + spec.ways);

    const bool per_class = spec.n_mode == UnlabeledMode::PerClass;
    const int need = spec.shots + spec.queries +
                     (per_class && !spec.distractor ? spec.unlabeled : 0);

    std::vector<int> support, unlabeled, queries, truth;
    std::vector<int> leftover;
    for (int c = 0; c < spec.ways; ++c) {
        auto idx = by_class[chosen[c]];
        if (static_cast<int>(idx.size()) < need)
            throw data_error("class " + std::to_string(chosen[c]) + " has " +
                             std::to_string(idx.size()) + " points, needs " + std::to_string(need));
        shuffle_indices(idx, rng);
        int at = 0;
        for (int s = 0; s < spec.shots; ++s) support.push_back(idx[at++]);
        for (int q = 0; q < spec.queries; ++q) {
            queries.push_back(idx[at]);
            truth.push_back(c);
            ++at;
        }
        if (!spec.distractor && per_class) {
            for (int u = 0; u < spec.unlabeled; ++u) unlabeled.push_back(idx[at++]);
        } else if (!spec.distractor) {
            leftover.insert(leftover.end(), idx.begin() + at, idx.end());
        }
    }

    const int total_unlabeled = per_class ? spec.unlabeled * spec.ways : spec.unlabeled;
    if (spec.distractor && spec.unlabeled > 0) {
        if (pool.classes <= spec.ways)
            throw data_error("distractor sampling needs classes beyond the " +
                             std::to_string(spec.ways) + " support classes");
        for (int c = spec.ways; c < pool.classes; ++c) {
            const auto& idx = by_class[class_order[c]];
            leftover.insert(leftover.end(), idx.begin(), idx.end());
        }
        if (static_cast<int>(leftover.size()) < total_unlabeled)
            throw data_error("not enough distractor points for the unlabeled draw");
        shuffle_indices(leftover, rng);
        unlabeled.assign(leftover.begin(), leftover.begin() + total_unlabeled);
    } else if (!per_class && spec.unlabeled > 0) {
        if (static_cast<int>(leftover.size()) < total_unlabeled)
            throw data_error("not enough pool points for the total-mode unlabeled draw");
        shuffle_indices(leftover, rng);
        unlabeled.assign(leftover.begin(), leftover.begin() + total_unlabeled);
    }

    EpisodeData e;
    e.ways = spec.ways;
    e.shots = spec.shots;
    e.unlabeled = static_cast<int>(unlabeled.size());
    e.queries = static_cast<int>(queries.size());
    e.points.reserve(support.size() + unlabeled.size() + queries.size());
    auto push = [&](int pool_idx, Role role, std::optional<int> label) {
        FeaturePoint p;
        p.id = pool.ids[pool_idx];
        p.role = role;
        p.label = label;
        p.vector = pool.features.row(pool_idx).transpose();
        e.points.push_back(std::move(p));
    };
    // Supports in class-label order: class c occupies shots c*K..(c+1)*K.
    for (int c = 0; c < spec.ways; ++c) {
        for (int s = 0; s < spec.shots; ++s) push(support[c * spec.shots + s], Role::Support, c);
    }
    for (int u : unlabeled) push(u, Role::Unlabeled, std::nullopt);
    for (int q : queries) push(q, Role::Query, std::nullopt);

    require_valid(e);
    if (query_truth) *query_truth = std::move(truth);
    return e;
}

}  // namespace

EpisodeData sample_episode(const FeaturePool& pool, const EpisodeSpec& spec, int episode_index) {
    return sample_episode_impl(pool, spec, episode_index, nullptr);
}

BenchReport run_benchmark(const FeaturePool& pool, const EpisodeSpec& spec, Method method,
                          const SolverConfig& config, int jobs) {
    spec.validate();
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    BenchReport report;
    report.method = method;
    report.spec = spec;
    report.per_episode.assign(spec.num_episodes, 0.0);

    std::vector<std::string> failures(spec.num_episodes);
    auto worker = [&](int first, int stride) {
        for (int ep = first; ep < spec.num_episodes; ep += stride) {
            try {
                std::vector<int> truth;
                const EpisodeData e = sample_episode_impl(pool, spec, ep, &truth);
                const std::vector<int> pred = run_episode(e, method, config);
                int correct = 0;
                for (std::size_t q = 0; q < truth.size(); ++q) {
                    if (pred[q] == truth[q]) ++correct;
                }
                report.per_episode[ep] = static_cast<double>(correct) / truth.size();
            } catch (const std::exception& ex) {
                failures[ep] = ex.what();
            }
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool_threads;
        for (int t = 0; t < jobs; ++t) pool_threads.emplace_back(worker, t, jobs);
        for (auto& th : pool_threads) th.join();
    }
    for (int ep = 0; ep < spec.num_episodes; ++ep) {
        if (!failures[ep].empty())
            throw data_error("episode " + std::to_string(ep) + " failed: " + failures[ep]);
    }

    const double n = spec.num_episodes;
    const double mean =
        std::accumulate(report.per_episode.begin(), report.per_episode.end(), 0.0) / n;
    double var = 0.0;
    for (double a : report.per_episode) var += (a - mean) * (a - mean);
    const double stdev = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    report.mean_accuracy = 100.0 * mean;
    report.ci95 = 100.0 * 1.96 * stdev / std::sqrt(n);
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string report_json(const BenchReport& report, bool include_wall_time) {
    nlohmann::ordered_json j;
    j["method"] = method_name(report.method);
    j["ways"] = report.spec.ways;
    j["shots"] = report.spec.shots;
    j["queries"] = report.spec.queries;
    j["unlabeled"] = report.spec.unlabeled;
    j["n_mode"] = report.spec.n_mode == UnlabeledMode::PerClass ? "per_class" : "total";
    j["distractor"] = report.spec.distractor;
    j["episodes"] = report.spec.num_episodes;
    j["seed"] = report.spec.seed;
    j["mean_accuracy"] = report.mean_accuracy;
    j["ci95"] = report.ci95;
    j["per_episode"] = report.per_episode;
    if (include_wall_time) j["wall_time_s"] = report.wall_time_s;
    return j.dump();
}

FeaturePool make_blob_pool(int classes, int per_class, int dim, double sigma, std::uint64_t seed,
                           double separation) {
    if (classes < 2 || per_class < 1 || dim < 1) throw config_error("bad blob pool shape");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Mat centers(classes, dim);
    for (int c = 0; c < classes; ++c) {
        Vec dir(dim);
        for (int j = 0; j < dim; ++j) dir[j] = gauss(rng);
        centers.row(c) = separation * dir.normalized().transpose();
    }

    FeaturePool pool;
    pool.classes = classes;
    pool.features.resize(classes * per_class, dim);
    int row = 0;
    for (int c = 0; c < classes; ++c) {
        for (int p = 0; p < per_class; ++p) {
            for (int j = 0; j < dim; ++j)
                pool.features(row, j) = centers(c, j) + sigma * gauss(rng);
            pool.ids.push_back("c" + std::to_string(c) + "p" + std::to_string(p));
            pool.labels.push_back(c);
            ++row;
        }
    }
    return pool;
}

}  // namespace ptn
