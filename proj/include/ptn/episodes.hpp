#pragma once

#include "ptn/core.hpp"
#include "ptn/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ptn {

enum class Method { Ptn, Dpn, PoissonRaw, Lp };

Method method_from_name(const std::string& name);
const char* method_name(Method m);

enum class UnlabeledMode { PerClass, Total };

struct EpisodeSpec {
    int ways = 5;       // C
    int shots = 1;      // K
    int queries = 15;   // V per class
    int unlabeled = 0;  // N, interpreted per n_mode
    UnlabeledMode n_mode = UnlabeledMode::PerClass;
    bool distractor = false;
    int num_episodes = 600;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BenchReport {
    double mean_accuracy = 0.0;  // percent
    double ci95 = 0.0;           // percent half-width
    std::vector<double> per_episode;
    Method method = Method::Dpn;
    EpisodeSpec spec;
    double wall_time_s = 0.0;
};

/// Normalize, optionally calibrate, build the graph, and run the chosen
/// inference method. Returns predicted class per query.
std::vector<int> run_episode(const EpisodeData& episode, Method method,
                             const SolverConfig& config);

/// Deterministic draw of episode `episode_index` from a labeled pool.
EpisodeData sample_episode(const FeaturePool& pool, const EpisodeSpec& spec, int episode_index);

BenchReport run_benchmark(const FeaturePool& pool, const EpisodeSpec& spec, Method method,
                          const SolverConfig& config, int jobs = 1);

std::string report_json(const BenchReport& report, bool include_wall_time = true);

/// Gaussian blob pool for synthetic benchmarks: `per_class` points around a
/// random unit-sphere center per class, noise sigma per coordinate.
FeaturePool make_blob_pool(int classes, int per_class, int dim, double sigma,
                           std::uint64_t seed, double separation = 1.0);

}  // namespace ptn
