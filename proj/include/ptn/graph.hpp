#pragma once

#include "ptn/core.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <vector>

namespace ptn {

using SpMat = Eigen::SparseMatrix<double>;

struct KnnResult {
    // neighbors[i] holds k indices sorted by ascending distance,
    // ties broken by ascending vertex index.
    std::vector<std::vector<int>> neighbors;
    std::vector<std::vector<double>> distances;
    Vec kth_distance;  // d_K(z_i)
    // Smallest nonzero distance to any vertex; bandwidth fallback when
    // duplicates fill the whole neighborhood. Zero if every point coincides.
    Vec nonzero_distance;
};

/// Symmetric weighted graph with its degree vector and unnormalized Laplacian.
struct SparseGraph {
    int m = 0;
    SpMat weights;    // W, zero diagonal
    Vec degrees;      // d_i = sum_j w_ij
    SpMat laplacian;  // L = D - W
    int components = 1;
};

/// Exact brute-force kNN over row features.
KnnResult knn_neighbors(const Mat& features, int k);

/// Directed Gaussian kernel weights w_ij = exp(-4 |z_i - z_j|^2 / d_K(z_i)^2).
SpMat gaussian_weights(const KnnResult& knn);

/// Symmetrize by averaging and assemble degrees and Laplacian.
SparseGraph assemble_graph(const SpMat& directed);

/// kNN Gaussian graph over an episode's features.
SparseGraph build_graph(const Mat& features, int k);

int count_components(const SpMat& weights);

// Edge list `i j w`, symmetric entries once with i < j.
void dump_edge_list(const SparseGraph& graph, std::ostream& out);

}  // namespace ptn
