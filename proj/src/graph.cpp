#include "ptn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>

namespace ptn {

KnnResult knn_neighbors(const Mat& features, int k) {
    const int m = static_cast<int>(features.rows());
    if (k < 1) throw config_error("knn k must be >= 1");
    if (k >= m) throw config_error("knn k must be below the vertex count");
    if (!features.allFinite()) throw data_error("non-finite features in knn");

    KnnResult res;
    res.neighbors.resize(m);
    res.distances.resize(m);
    res.kth_distance.resize(m);
    res.nonzero_distance.setZero(m);

    // Squared distances via the Gram matrix: |x_i - x_j|^2 = n_i + n_j - 2 x_i.x_j.
    const Vec sq_norms = features.rowwise().squaredNorm();
    const Mat gram = features * features.transpose();

    std::vector<std::pair<double, int>> cand(m - 1);
    for (int i = 0; i < m; ++i) {
        int c = 0;
        double smallest_nonzero = 0.0;
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            const double sq = std::max(0.0, sq_norms[i] + sq_norms[j] - 2.0 * gram(i, j));
            const double dist = std::sqrt(sq);
            cand[c++] = {dist, j};
            if (dist > 0.0 && (smallest_nonzero == 0.0 || dist < smallest_nonzero))
                smallest_nonzero = dist;
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        res.neighbors[i].resize(k);
        res.distances[i].resize(k);
        for (int t = 0; t < k; ++t) {
            res.distances[i][t] = cand[t].first;
            res.neighbors[i][t] = cand[t].second;
        }
        res.kth_distance[i] = cand[k - 1].first;
        res.nonzero_distance[i] = smallest_nonzero;
    }
    return res;
}

SpMat gaussian_weights(const KnnResult& knn) {
    const int m = static_cast<int>(knn.neighbors.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(m * (knn.neighbors.empty() ? 0 : knn.neighbors[0].size()));
    for (int i = 0; i < m; ++i) {
        double bandwidth = knn.kth_distance[i];
        if (bandwidth == 0.0) {
            // Duplicates filled the neighborhood: fall back to the smallest
            // nonzero distance to any vertex.
            bandwidth = knn.nonzero_distance[i];
            if (bandwidth == 0.0)
                throw data_error("degenerate neighborhood at vertex " + std::to_string(i) +
                                 ": all neighbor distances are zero");
        }
        const double inv = 1.0 / (bandwidth * bandwidth);
        for (std::size_t t = 0; t < knn.neighbors[i].size(); ++t) {
            const double d = knn.distances[i][t];
            trips.emplace_back(i, knn.neighbors[i][t], std::exp(-4.0 * d * d * inv));
        }
    }
    SpMat w(m, m);
    w.setFromTriplets(trips.begin(), trips.end());
    return w;
}

int count_components(const SpMat& weights) {
    const int m = static_cast<int>(weights.rows());
    std::vector<int> comp(m, -1);
    int n_comp = 0;
    for (int s = 0; s < m; ++s) {
        if (comp[s] >= 0) continue;
        std::queue<int> q;
        q.push(s);
        comp[s] = n_comp;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (SpMat::InnerIterator it(weights, u); it; ++it) {
                if (it.value() > 0.0 && comp[it.row()] < 0) {
                    comp[it.row()] = n_comp;
                    q.push(static_cast<int>(it.row()));
                }
            }
        }
        ++n_comp;
    }
    return n_comp;
}

SparseGraph assemble_graph(const SpMat& directed) {
    SparseGraph g;
    g.m = static_cast<int>(directed.rows());
    SpMat t = directed.transpose();
    g.weights = 0.5 * (directed + t);
    g.weights.prune(0.0);
    g.degrees = g.weights * Vec::Ones(g.m);
    for (int i = 0; i < g.m; ++i) {
        if (g.degrees[i] <= 0.0)
            throw data_error("isolated vertex " + std::to_string(i) + " in graph");
    }
    SpMat deg(g.m, g.m);
    deg.reserve(Eigen::VectorXi::Constant(g.m, 1));
    for (int i = 0; i < g.m; ++i) deg.insert(i, i) = g.degrees[i];
    g.laplacian = deg - g.weights;
    g.components = count_components(g.weights);
    return g;
}

SparseGraph build_graph(const Mat& features, int k) {
    return assemble_graph(gaussian_weights(knn_neighbors(features, k)));
}

void dump_edge_list(const SparseGraph& graph, std::ostream& out) {
    out.precision(17);
    for (int col = 0; col < graph.weights.outerSize(); ++col) {
        for (SpMat::InnerIterator it(graph.weights, col); it; ++it) {
            if (it.row() < it.col()) out << it.row() << " " << it.col() << " " << it.value() << "\n";
        }
    }
}

}  // namespace ptn
