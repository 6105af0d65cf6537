#include "ptn/poisson.hpp"

namespace ptn {

SourceMatrix build_source(const EpisodeData& e) {
    const int m = e.size();
    const int labeled = e.labeled_count();
    SourceMatrix src;
    src.mean_label = Vec::Zero(e.ways);
    for (int i = 0; i < labeled; ++i) src.mean_label[*e.points[i].label] += 1.0;
    src.mean_label /= labeled;
    src.entries = Mat::Zero(m, e.ways);
    for (int i = 0; i < labeled; ++i) {
        src.entries.row(i) = -src.mean_label.transpose();
        src.entries(i, *e.points[i].label) += 1.0;
    }
    return src;
}

int mixing_time(const SparseGraph& graph, int labeled_count, int tp_max) {
    const int m = graph.m;
    if (labeled_count < 1 || labeled_count >= m)
        throw config_error("labeled_count must lie in [1, m)");
    Vec sp = Vec::Zero(m);
    sp.head(labeled_count).setOnes();
    const Vec target = graph.degrees / graph.degrees.sum();
    const double tol = 1.0 / m;
    for (int tp = 1; tp <= tp_max; ++tp) {
        sp = graph.weights * (sp.array() / graph.degrees.array()).matrix();
        if ((sp - target).lpNorm<Eigen::Infinity>() <= tol) return tp;
    }
    return tp_max;
}

Mat poisson_iterate(const SparseGraph& graph, const SourceMatrix& source, int steps) {
    if (steps < 1) throw config_error("poisson steps must be >= 1");
    Mat g = Mat::Zero(graph.m, source.entries.cols());
    const Vec inv_deg = graph.degrees.cwiseInverse();
    for (int t = 0; t < steps; ++t) {
        g += inv_deg.asDiagonal() * (source.entries - graph.laplacian * g);
        if (!g.allFinite()) throw numeric_error("poisson iteration diverged");
    }
    return g;
}

Mat poisson_solve_dense(const SparseGraph& graph, const SourceMatrix& source, int oracle_cap) {
    if (graph.m > oracle_cap) throw config_error("graph exceeds the dense oracle cap");
    if (graph.components != 1)
        throw data_error("dense oracle requires a connected graph");
    const Mat dense_l = Mat(graph.laplacian);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(dense_l);
    Mat g = cod.solve(source.entries);
    // L is rank m-1 on a connected graph; pin the free constant per class
    // so the degree-weighted mean vanishes.
    const double total_degree = graph.degrees.sum();
    for (int c = 0; c < g.cols(); ++c) {
        g.col(c).array() -= graph.degrees.dot(g.col(c)) / total_degree;
    }
    const double residual = (dense_l * g - source.entries).lpNorm<Eigen::Infinity>();
    if (residual > 1e-9) throw numeric_error("dense poisson solve residual too large");
    return g;
}

}  // namespace ptn
