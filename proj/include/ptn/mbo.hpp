#pragma once

#include "ptn/core.hpp"
#include "ptn/graph.hpp"
#include "ptn/poisson.hpp"

#include <vector>

namespace ptn {

struct VolumeState {
    Vec reweight;   // r
    Vec fractions;  // o_hat under the final r
};

/// One row per outer MBO iteration, for convergence inspection.
struct MboTrace {
    std::vector<Vec> fractions;
    std::vector<Vec> reweight;
    std::vector<double> energy;  // E1 = tr(G'LG) - mu * sum_s (y_s - ybar) . g_s
};

/// Index of the simplex vertex nearest to `scores` (argmax, lowest-index ties).
int simplex_project(const Vec& scores);

/// Project every row of G to its nearest one-hot vector.
Mat project_rows(const Mat& g);

/// m2 explicit gradient steps G <- G - dmx (L G - mu A').
Mat mbo_gradient_steps(const SparseGraph& graph, const SourceMatrix& source, Mat g, double mu,
                       double dmx, int m2);

/// Fit the class reweighting vector r against the prior by m3 clipped
/// gradient steps on the assignment fractions.
VolumeState volume_constraint_fit(const Mat& g, const ClassPrior& prior, double phi,
                                  double clip_lo, double clip_hi, int m3);

/// Poisson propagation followed by the MBO graph-cut refinement.
/// Returns the V x C one-hot query score matrix.
Mat poisson_mbo(const EpisodeData& episode, const SolverConfig& config, const ClassPrior& prior,
                MboTrace* trace = nullptr);

/// Same, reusing an already-built graph over the episode's features.
Mat poisson_mbo_on_graph(const SparseGraph& graph, const EpisodeData& episode,
                         const SolverConfig& config, const ClassPrior& prior,
                         MboTrace* trace = nullptr);

/// Per-row argmax with lowest-index tie-break.
std::vector<int> predict_labels(const Mat& query_scores);

}  // namespace ptn
