#pragma once

#include "ptn/core.hpp"
#include "ptn/graph.hpp"

namespace ptn {

/// Label spreading F <- alpha S F + (1 - alpha) Y with the symmetric
/// normalized affinity S = D^{-1/2} W D^{-1/2}.
Mat label_propagation(const SparseGraph& graph, const Mat& labels, double alpha, int iters,
                      double tol = 1e-6);

/// Baseline over a whole episode; returns the V x C query score block.
Mat label_propagation_episode(const SparseGraph& graph, const EpisodeData& episode,
                              const SolverConfig& config);

}  // namespace ptn
