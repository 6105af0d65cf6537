#pragma once

#include "ptn/core.hpp"
#include "ptn/graph.hpp"
#include "ptn/poisson.hpp"

#include <random>
#include <string>
#include <vector>

namespace ptn_test {

struct RawPoint {
    ptn::Role role;
    int label;  // -1 for unlabeled/query
    std::vector<double> coords;
};

// Points must already be in canonical [support, unlabeled, query] order.
inline ptn::EpisodeData make_episode(int ways, int shots, const std::vector<RawPoint>& raw) {
    ptn::EpisodeData e;
    e.ways = ways;
    e.shots = shots;
    int i = 0;
    for (const auto& r : raw) {
        ptn::FeaturePoint p;
        p.id = "p" + std::to_string(i++);
        p.role = r.role;
        if (r.label >= 0) p.label = r.label;
        p.vector = Eigen::Map<const ptn::Vec>(r.coords.data(), r.coords.size());
        e.points.push_back(std::move(p));
        if (r.role == ptn::Role::Unlabeled) ++e.unlabeled;
        if (r.role == ptn::Role::Query) ++e.queries;
    }
    return e;
}

inline ptn::SparseGraph graph_from_edges(int m,
                                         const std::vector<std::tuple<int, int, double>>& edges) {
    std::vector<Eigen::Triplet<double>> trips;
    for (auto [i, j, w] : edges) {
        trips.emplace_back(i, j, w);
        trips.emplace_back(j, i, w);
    }
    ptn::SpMat directed(m, m);
    directed.setFromTriplets(trips.begin(), trips.end());
    return ptn::assemble_graph(directed);
}

// Random sparse connected graph: a random spanning path plus extra edges.
inline ptn::SparseGraph random_connected_graph(int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> wdist(0.1, 1.0);
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    for (int i = m - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
    std::vector<std::tuple<int, int, double>> edges;
    for (int i = 0; i + 1 < m; ++i) edges.emplace_back(order[i], order[i + 1], wdist(rng));
    // Close a triangle so the graph is never bipartite; on bipartite graphs
    // the Poisson relaxation orbits the solution instead of converging.
    if (m >= 3) edges.emplace_back(order[0], order[2], wdist(rng));
    const int extra = m;
    for (int t = 0; t < extra; ++t) {
        const int a = static_cast<int>(rng() % m);
        const int b = static_cast<int>(rng() % m);
        if (a != b) edges.emplace_back(a, b, wdist(rng));
    }
    return graph_from_edges(m, edges);
}

// Random labeled source over the first `labeled` vertices (one-hot minus mean).
inline ptn::SourceMatrix random_source(int m, int labeled, int ways, std::mt19937_64& rng) {
    ptn::SourceMatrix src;
    src.mean_label = ptn::Vec::Zero(ways);
    std::vector<int> labels(labeled);
    for (int i = 0; i < labeled; ++i) {
        labels[i] = i < ways ? i : static_cast<int>(rng() % ways);  // every class hit
        src.mean_label[labels[i]] += 1.0;
    }
    src.mean_label /= labeled;
    src.entries = ptn::Mat::Zero(m, ways);
    for (int i = 0; i < labeled; ++i) {
        src.entries.row(i) = -src.mean_label.transpose();
        src.entries(i, labels[i]) += 1.0;
    }
    return src;
}

}  // namespace ptn_test
