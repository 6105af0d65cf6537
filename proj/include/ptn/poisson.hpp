#pragma once

#include "ptn/core.hpp"
#include "ptn/graph.hpp"

namespace ptn {

/// Zero-mean point sources at the labeled vertices, stored m x C.
struct SourceMatrix {
    Mat entries;   // row s = y_s - ybar for labeled rows, zero elsewhere
    Vec mean_label;  // ybar
};

SourceMatrix build_source(const EpisodeData& episode);

/// Smallest tp with ||sp_tp - W1/(1'W1)||_inf <= 1/m, capped at tp_max.
/// sp_0 carries ones in the first labeled_count positions.
int mixing_time(const SparseGraph& graph, int labeled_count, int tp_max);

/// Fixed-point relaxation G <- G + D^-1 (A - L G), started from zero.
Mat poisson_iterate(const SparseGraph& graph, const SourceMatrix& source, int steps);

/// Dense direct solve of L G = A with per-class degree-weighted mean zero.
/// Test oracle; refuses disconnected graphs.
Mat poisson_solve_dense(const SparseGraph& graph, const SourceMatrix& source, int oracle_cap = 500);

}  // namespace ptn
