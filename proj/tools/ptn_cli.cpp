#include "ptn/calibration.hpp"
#include "ptn/contrastive.hpp"
#include "ptn/core.hpp"
#include "ptn/episodes.hpp"
#include "ptn/graph.hpp"
#include "ptn/io.hpp"
#include "ptn/label_prop.hpp"
#include "ptn/mbo.hpp"
#include "ptn/poisson.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

using nlohmann::ordered_json;

// Exit codes: 0 success, 1 data error, 2 config error, 3 numerical error.
constexpr int kDataError = 1;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

struct ConfigFlags {
    std::string config_path;
    ptn::SolverConfig overrides;
    CLI::App* app = nullptr;

    void attach(CLI::App& cmd) {
        app = &cmd;
        cmd.add_option("--config", config_path, "flat key=value config file");
        cmd.add_option("--mu", overrides.mu, "source term weight");
        cmd.add_option("--m1", overrides.m1, "outer MBO iterations");
        cmd.add_option("--m2", overrides.m2, "gradient steps per outer iteration");
        cmd.add_option("--m3", overrides.m3, "volume-constraint steps");
        cmd.add_option("--phi", overrides.phi, "volume-constraint time step");
        cmd.add_option("--clip-lo", overrides.clip_lo, "reweight clamp lower bound");
        cmd.add_option("--clip-hi", overrides.clip_hi, "reweight clamp upper bound");
        cmd.add_option("--knn-k", overrides.knn_k, "neighbors per vertex");
        cmd.add_option("--tp-max", overrides.tp_max, "Poisson iteration cap");
        cmd.add_option("--tau", overrides.tau, "contrastive temperature");
        cmd.add_option("--lambda", overrides.lambda, "KL regularizer weight");
        cmd.add_option("--alpha", overrides.lp_alpha, "label-propagation alpha");
        cmd.add_option("--lp-iters", overrides.lp_iters, "label-propagation iteration cap");
        cmd.add_option("--seed", overrides.seed, "root RNG seed");
    }

    // Precedence: flag > file > default.
    ptn::SolverConfig resolve() const {
        ptn::SolverConfig cfg;
        if (!config_path.empty()) cfg = ptn::load_config_file(config_path);
        auto take = [&](const char* flag, auto member) {
            if (app->count(flag) > 0) cfg.*member = overrides.*member;
        };
        take("--mu", &ptn::SolverConfig::mu);
        take("--m1", &ptn::SolverConfig::m1);
        take("--m2", &ptn::SolverConfig::m2);
        take("--m3", &ptn::SolverConfig::m3);
        take("--phi", &ptn::SolverConfig::phi);
        take("--clip-lo", &ptn::SolverConfig::clip_lo);
        take("--clip-hi", &ptn::SolverConfig::clip_hi);
        take("--knn-k", &ptn::SolverConfig::knn_k);
        take("--tp-max", &ptn::SolverConfig::tp_max);
        take("--tau", &ptn::SolverConfig::tau);
        take("--lambda", &ptn::SolverConfig::lambda);
        take("--alpha", &ptn::SolverConfig::lp_alpha);
        take("--lp-iters", &ptn::SolverConfig::lp_iters);
        take("--seed", &ptn::SolverConfig::seed);
        cfg.validate();
        return cfg;
    }
};

ptn::ClassPrior parse_prior(const std::string& spec, int ways) {
    if (spec.empty() || spec == "uniform") return ptn::ClassPrior::uniform(ways);
    ptn::ClassPrior prior;
    std::vector<double> vals;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (static_cast<int>(vals.size()) != ways)
        throw ptn::config_error("prior has " + std::to_string(vals.size()) + " entries, expected " +
                                std::to_string(ways));
    prior.fractions = Eigen::Map<ptn::Vec>(vals.data(), vals.size());
    prior.validate();
    return prior;
}

int run_infer(const std::string& features_path, const ConfigFlags& flags,
              const std::string& method_name, const std::string& prior_spec, bool no_calibration,
              const std::string& dump_graph_path, const std::string& dump_diag_path) {
    const auto start = std::chrono::steady_clock::now();
    const ptn::SolverConfig cfg = flags.resolve();
    ptn::Method method = ptn::method_from_name(method_name);
    if (no_calibration && (method == ptn::Method::Ptn || method == ptn::Method::Dpn))
        method = ptn::Method::PoissonRaw;

    ptn::EpisodeData episode = ptn::load_feature_file(features_path);
    ptn::EpisodeData e = ptn::l2_normalize(episode);
    if (method == ptn::Method::Ptn || method == ptn::Method::Dpn)
        e = ptn::calibrate_queries(e, ptn::cross_class_bias(e));

    const int k = std::min(cfg.knn_k, e.size() - 1);
    const ptn::SparseGraph graph = ptn::build_graph(e.feature_matrix(), k);
    if (!dump_graph_path.empty()) {
        std::ofstream out(dump_graph_path);
        if (!out) throw ptn::data_error("cannot write '" + dump_graph_path + "'");
        ptn::dump_edge_list(graph, out);
    }
    if (graph.components > 1)
        std::cerr << "warning: graph has " << graph.components
                  << " connected components; the volume constraint is applied globally\n";

    ptn::Mat query_scores;
    ptn::MboTrace trace;
    if (method == ptn::Method::Lp) {
        query_scores = ptn::label_propagation_episode(graph, e, cfg);
    } else {
        query_scores = ptn::poisson_mbo_on_graph(graph, e, cfg, parse_prior(prior_spec, e.ways),
                                                 dump_diag_path.empty() ? nullptr : &trace);
    }
    if (!dump_diag_path.empty() && method != ptn::Method::Lp) {
        std::ofstream out(dump_diag_path);
        if (!out) throw ptn::data_error("cannot write '" + dump_diag_path + "'");
        out << "iter";
        for (int c = 0; c < e.ways; ++c) out << ",o_hat" << c;
        for (int c = 0; c < e.ways; ++c) out << ",r" << c;
        out << ",energy\n";
        out.precision(17);
        for (std::size_t i = 0; i < trace.energy.size(); ++i) {
            out << i;
            for (int c = 0; c < e.ways; ++c) out << "," << trace.fractions[i][c];
            for (int c = 0; c < e.ways; ++c) out << "," << trace.reweight[i][c];
            out << "," << trace.energy[i] << "\n";
        }
    }

    const std::vector<int> pred = ptn::predict_labels(query_scores);
    ordered_json j;
    j["method"] = ptn::method_name(method);
    ordered_json preds = ordered_json::object();
    for (int q = 0; q < static_cast<int>(pred.size()); ++q)
        preds[e.points[e.query_offset() + q].id] = pred[q];
    j["predictions"] = preds;
    j["timing_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << j.dump() << "\n";
    return 0;
}

int run_oracle(const std::string& features_path, const ConfigFlags& flags) {
    const ptn::SolverConfig cfg = flags.resolve();
    ptn::EpisodeData e = ptn::l2_normalize(ptn::load_feature_file(features_path));
    const int k = std::min(cfg.knn_k, e.size() - 1);
    const ptn::SparseGraph graph = ptn::build_graph(e.feature_matrix(), k);
    const ptn::Mat g = ptn::poisson_solve_dense(graph, ptn::build_source(e));
    ordered_json j;
    j["m"] = e.size();
    j["solution"] = ordered_json::array();
    for (int i = 0; i < g.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < g.cols(); ++c) row.push_back(g(i, c));
        j["solution"].push_back(row);
    }
    std::cout << j.dump() << "\n";
    return 0;
}

int run_episodes(const std::string& pool_path, ptn::EpisodeSpec spec, const std::string& n_mode,
                 const std::string& method_name, const ConfigFlags& flags, int jobs,
                 bool omit_timing) {
    if (n_mode == "per_class") spec.n_mode = ptn::UnlabeledMode::PerClass;
    else if (n_mode == "total") spec.n_mode = ptn::UnlabeledMode::Total;
    else throw ptn::config_error("n-mode must be per_class or total");
    spec.validate();
    const ptn::SolverConfig cfg = flags.resolve();
    spec.seed = cfg.seed;
    if (jobs < 1) jobs = std::max(1u, std::thread::hardware_concurrency());

    const ptn::FeaturePool pool = ptn::load_pool_file(pool_path);
    const ptn::BenchReport report =
        ptn::run_benchmark(pool, spec, ptn::method_from_name(method_name), cfg, jobs);
    std::cout << ptn::report_json(report, !omit_timing) << "\n";
    std::cerr << "acc " << report.mean_accuracy << " +- " << report.ci95 << " over "
              << spec.num_episodes << " episodes\n";
    return 0;
}

int run_loss(const std::string& views_path, const ConfigFlags& flags) {
    const ptn::SolverConfig cfg = flags.resolve();
    const ptn::ContrastiveBatch batch = ptn::load_views_file(views_path);
    const ptn::LossGrad lg = ptn::ut_loss_and_grad(batch, cfg.tau, cfg.lambda);
    const double grad_norm = std::sqrt(lg.grad_a.squaredNorm() + lg.grad_b.squaredNorm());
    ordered_json j;
    j["loss"] = lg.loss;
    j["grad_norm"] = grad_norm;
    j["n"] = batch.pairs();
    j["d"] = batch.dim();
    std::cout << j.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson-MBO semi-supervised few-shot label inference"};
    app.require_subcommand(1);

    auto* infer = app.add_subcommand("infer", "predict query labels for one episode");
    std::string features_path, method = "dpn", prior = "uniform", dump_graph, dump_diag;
    bool no_calibration = false;
    infer->add_option("--features", features_path, "episode feature CSV")->required();
    infer->add_option("--method", method, "ptn|dpn|poisson|lp");
    infer->add_option("--prior", prior, "'uniform' or comma-separated class fractions");
    infer->add_flag("--no-calibration", no_calibration, "skip query feature calibration");
    infer->add_option("--dump-graph", dump_graph, "write edge list here");
    infer->add_option("--dump-diagnostics", dump_diag, "write MBO convergence CSV here");
    ConfigFlags infer_cfg;
    infer_cfg.attach(*infer);

    auto* oracle = app.add_subcommand("oracle", "dense constrained Poisson solve (diagnostics)");
    std::string oracle_features;
    oracle->add_option("--features", oracle_features, "episode feature CSV")->required();
    ConfigFlags oracle_cfg;
    oracle_cfg.attach(*oracle);

    auto* episodes = app.add_subcommand("episodes", "run the benchmark protocol over a pool");
    std::string pool_path, n_mode = "per_class", ep_method = "dpn";
    ptn::EpisodeSpec spec;
    int jobs = 0;
    bool omit_timing = false;
    episodes->add_option("--pool", pool_path, "labeled pool CSV")->required();
    episodes->add_option("--ways", spec.ways, "classes per episode");
    episodes->add_option("--shots", spec.shots, "labeled shots per class");
    episodes->add_option("--queries", spec.queries, "queries per class");
    episodes->add_option("--unlabeled", spec.unlabeled, "extra unlabeled count N");
    episodes->add_option("--n-mode", n_mode, "per_class|total interpretation of N");
    episodes->add_flag("--distractor", spec.distractor, "draw unlabeled from disjoint classes");
    episodes->add_option("--episodes", spec.num_episodes, "number of tasks");
    episodes->add_option("--method", ep_method, "ptn|dpn|poisson|lp");
    episodes->add_option("--jobs", jobs, "worker threads (0 = hardware)");
    episodes->add_flag("--omit-timing", omit_timing, "drop wall_time_s from the JSON");
    ConfigFlags episodes_cfg;
    episodes_cfg.attach(*episodes);

    auto* loss = app.add_subcommand("loss", "evaluate the transfer loss on a two-view batch");
    auto* loss_eval = loss->add_subcommand("eval", "loss and gradient norm as JSON");
    std::string views_path;
    loss_eval->add_option("--views", views_path, "two-view feature CSV")->required();
    ConfigFlags loss_cfg;
    loss_cfg.attach(*loss_eval);

    try {
        app.parse(argc, argv);
        if (*infer) return run_infer(features_path, infer_cfg, method, prior, no_calibration,
                                     dump_graph, dump_diag);
        if (*oracle) return run_oracle(oracle_features, oracle_cfg);
        if (*episodes)
            return run_episodes(pool_path, spec, n_mode, ep_method, episodes_cfg, jobs,
                                omit_timing);
        if (*loss_eval) return run_loss(views_path, loss_cfg);
        std::cerr << "loss requires the 'eval' subcommand\n";
        return kConfigError;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ptn::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ptn::numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumericError;
    } catch (const ptn::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return 0;
}
