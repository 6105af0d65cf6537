#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy mirrored by the CLI exit codes.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Role { Support, Unlabeled, Query };

const char* role_tag(Role r);
Role role_from_tag(const std::string& tag);

struct FeaturePoint {
    std::string id;
    Role role = Role::Unlabeled;
    std::optional<int> label;  // present iff role == Support
    Vec vector;
};

/// One C-way-K-shot task. Points are kept in canonical order:
/// [0, K*C) support, [K*C, K*C+N) unlabeled, [K*C+N, m) query.
struct EpisodeData {
    std::vector<FeaturePoint> points;
    int ways = 0;     // C
    int shots = 0;    // K
    int unlabeled = 0; // N
    int queries = 0;  // V

    int size() const { return static_cast<int>(points.size()); }
    int labeled_count() const { return ways * shots; }
    int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().vector.size()); }
    int query_offset() const { return labeled_count() + unlabeled; }

    /// Row-major m x d feature matrix in canonical order.
    Mat feature_matrix() const;
};

struct ClassPrior {
    Vec fractions;

    static ClassPrior uniform(int ways);
    void validate() const;
};

struct SolverConfig {
    double mu = 1.5;
    int m1 = 20;
    int m2 = 40;
    int m3 = 100;
    double phi = 10.0;
    double clip_lo = 0.5;
    double clip_hi = 1.0;
    int knn_k = 30;
    int tp_max = 100;
    double tau = 0.1;
    double lambda = 1.0;
    double lp_alpha = 0.99;
    int lp_iters = 1000;
    double lp_tol = 1e-6;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Scale every feature vector to unit Euclidean norm.
EpisodeData l2_normalize(const EpisodeData& episode);

/// Returns the list of invariant violations; empty means valid.
std::vector<std::string> validate_episode(const EpisodeData& episode);

/// Throws data_error if validate_episode reports anything.
void require_valid(const EpisodeData& episode);

}  // namespace ptn
