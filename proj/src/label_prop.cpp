#include "ptn/label_prop.hpp"

namespace ptn {

Mat label_propagation(const SparseGraph& graph, const Mat& labels, double alpha, int iters,
                      double tol) {
    if (alpha <= 0.0 || alpha >= 1.0) throw config_error("alpha must lie in (0,1)");
    if (iters < 1) throw config_error("iteration cap must be >= 1");
    if (labels.rows() != graph.m) throw data_error("label matrix size mismatch");
    for (int i = 0; i < graph.m; ++i) {
        if (graph.degrees[i] <= 0.0)
            throw data_error("isolated vertex " + std::to_string(i) + " in label propagation");
    }
    const Vec inv_sqrt_deg = graph.degrees.cwiseSqrt().cwiseInverse();
    const Mat clamp = (1.0 - alpha) * labels;
    Mat f = labels;
    for (int t = 0; t < iters; ++t) {
        Mat next = alpha * (inv_sqrt_deg.asDiagonal() *
                            (graph.weights * (inv_sqrt_deg.asDiagonal() * f))) +
                   clamp;
        const double residual = (next - f).lpNorm<Eigen::Infinity>();
        f = std::move(next);
        if (residual <= tol) break;
    }
    if (!f.allFinite()) throw numeric_error("label propagation diverged");
    return f;
}

Mat label_propagation_episode(const SparseGraph& graph, const EpisodeData& episode,
                              const SolverConfig& config) {
    Mat y = Mat::Zero(episode.size(), episode.ways);
    for (int i = 0; i < episode.labeled_count(); ++i) y(i, *episode.points[i].label) = 1.0;
    const Mat f = label_propagation(graph, y, config.lp_alpha, config.lp_iters, config.lp_tol);
    return f.bottomRows(episode.queries);
}

}  // namespace ptn
