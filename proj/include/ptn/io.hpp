#pragma once

#include "ptn/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ptn {

/// Labeled feature pool the episode sampler draws from.
struct FeaturePool {
    std::vector<std::string> ids;
    std::vector<int> labels;
    Mat features;  // one row per point
    int classes = 0;

    int size() const { return static_cast<int>(ids.size()); }
    int dim() const { return static_cast<int>(features.cols()); }
};

/// Two augmented views of the same minibatch, paired row by row.
struct ContrastiveBatch {
    Mat view_a;
    Mat view_b;

    int pairs() const { return static_cast<int>(view_a.rows()); }
    int dim() const { return static_cast<int>(view_a.cols()); }
};

// Feature CSV: header `id,role,label,f0,...,f{d-1}`; role in {S,U,Q};
// label is -1 on unlabeled/query rows. Points are reordered into
// canonical [support, unlabeled, query] order on load.
EpisodeData load_feature_file(const std::string& path);
EpisodeData read_episode_csv(std::istream& in, const std::string& origin);
void save_feature_file(const EpisodeData& episode, const std::string& path);
void write_episode_csv(const EpisodeData& episode, std::ostream& out);

/// Pool CSV uses the same schema with every row labeled.
FeaturePool load_pool_file(const std::string& path);

// Two-view CSV: header `id,view,f0,...`; view in {A,B}; rows paired by id.
ContrastiveBatch load_views_file(const std::string& path);

/// Flat `key=value` config file; unknown keys are rejected.
SolverConfig load_config_file(const std::string& path);
void apply_config_entry(SolverConfig& cfg, const std::string& key, const std::string& value);

}  // namespace ptn
