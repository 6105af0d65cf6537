#include "ptn/mbo.hpp"

#include <algorithm>

namespace ptn {

int simplex_project(const Vec& scores) {
    if (!scores.allFinite()) throw numeric_error("non-finite scores in projection");
    int best = 0;
    for (int c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) best = c;
    }
    return best;
}

Mat project_rows(const Mat& g) {
    Mat out = Mat::Zero(g.rows(), g.cols());
    for (int i = 0; i < g.rows(); ++i) out(i, simplex_project(g.row(i).transpose())) = 1.0;
    return out;
}

Mat mbo_gradient_steps(const SparseGraph& graph, const SourceMatrix& source, Mat g, double mu,
                       double dmx, int m2) {
    if (m2 < 1) throw config_error("m2 must be >= 1");
    const Mat forcing = mu * source.entries;
    for (int j = 0; j < m2; ++j) {
        g -= dmx * (graph.laplacian * g - forcing);
        if (!g.allFinite()) throw numeric_error("mbo gradient step diverged");
    }
    return g;
}

namespace {

Vec assignment_fractions(const Mat& g, const Vec& r) {
    Vec frac = Vec::Zero(g.cols());
    for (int i = 0; i < g.rows(); ++i) {
        frac[simplex_project(g.row(i).transpose().cwiseProduct(r))] += 1.0;
    }
    return frac / g.rows();
}

}  // namespace

VolumeState volume_constraint_fit(const Mat& g, const ClassPrior& prior, double phi,
                                  double clip_lo, double clip_hi, int m3) {
    if (m3 < 1) throw config_error("m3 must be >= 1");
    if (clip_lo >= clip_hi) throw config_error("clip_lo must be below clip_hi");
    VolumeState state;
    state.reweight = Vec::Ones(g.cols());
    for (int j = 0; j < m3; ++j) {
        state.fractions = assignment_fractions(g, state.reweight);
        state.reweight =
            (state.reweight + phi * (prior.fractions - state.fractions))
                .cwiseMax(clip_lo)
                .cwiseMin(clip_hi);
    }
    state.fractions = assignment_fractions(g, state.reweight);
    return state;
}

Mat poisson_mbo_on_graph(const SparseGraph& graph, const EpisodeData& episode,
                         const SolverConfig& config, const ClassPrior& prior, MboTrace* trace) {
    config.validate();
    prior.validate();
    if (prior.fractions.size() != episode.ways) throw config_error("prior size must equal C");

    const SourceMatrix source = build_source(episode);
    const int tp = mixing_time(graph, episode.labeled_count(), config.tp_max);
    Mat g = poisson_iterate(graph, source, tp);

    const double dmx = 1.0 / graph.degrees.maxCoeff();
    g *= config.mu;
    for (int i = 0; i < config.m1; ++i) {
        g = mbo_gradient_steps(graph, source, std::move(g), config.mu, dmx, config.m2);
        const VolumeState vol = volume_constraint_fit(g, prior, config.phi, config.clip_lo,
                                                      config.clip_hi, config.m3);
        if (trace) {
            trace->fractions.push_back(vol.fractions);
            trace->reweight.push_back(vol.reweight);
            const double cut = (g.transpose() * (graph.laplacian * g)).trace();
            const double fit = (source.entries.array() * g.array()).sum();
            trace->energy.push_back(cut - config.mu * fit);
        }
        g = project_rows(g * vol.reweight.asDiagonal());
    }
    return g.bottomRows(episode.queries);
}

Mat poisson_mbo(const EpisodeData& episode, const SolverConfig& config, const ClassPrior& prior,
                MboTrace* trace) {
    require_valid(episode);
    if (episode.queries < 1) throw data_error("episode has no queries");
    const SparseGraph graph = build_graph(episode.feature_matrix(), config.knn_k);
    return poisson_mbo_on_graph(graph, episode, config, prior, trace);
}

std::vector<int> predict_labels(const Mat& query_scores) {
    std::vector<int> out(query_scores.rows());
    for (int i = 0; i < query_scores.rows(); ++i) out[i] = simplex_project(query_scores.row(i).transpose());
    return out;
}

}  // namespace ptn
