#include "ptn/core.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

namespace ptn {

const char* role_tag(Role r) {
    switch (r) {
        case Role::Support: return "S";
        case Role::Unlabeled: return "U";
        case Role::Query: return "Q";
    }
    return "?";
}

Role role_from_tag(const std::string& tag) {
    if (tag == "S") return Role::Support;
    if (tag == "U") return Role::Unlabeled;
    if (tag == "Q") return Role::Query;
    throw data_error("unknown role tag '" + tag + "'");
}

Mat EpisodeData::feature_matrix() const {
    Mat out(size(), dim());
    for (int i = 0; i < size(); ++i) out.row(i) = points[i].vector.transpose();
    return out;
}

ClassPrior ClassPrior::uniform(int ways) {
    ClassPrior p;
    p.fractions = Vec::Constant(ways, 1.0 / ways);
    return p;
}

void ClassPrior::validate() const {
    if (fractions.size() < 2) throw config_error("prior needs at least 2 classes");
    if ((fractions.array() <= 0.0).any()) throw config_error("prior entries must be positive");
    if (std::abs(fractions.sum() - 1.0) > 1e-9) throw config_error("prior must sum to 1");
}

void SolverConfig::validate() const {
    if (mu <= 0.0) throw config_error("mu must be positive");
    if (m1 < 1 || m2 < 1 || m3 < 1) throw config_error("iteration counts must be >= 1");
    if (clip_lo >= clip_hi) throw config_error("clip_lo must be below clip_hi");
    if (knn_k < 1) throw config_error("knn_k must be >= 1");
    if (tp_max < 1) throw config_error("tp_max must be >= 1");
    if (tau <= 0.0) throw config_error("tau must be positive");
    if (lambda < 0.0) throw config_error("lambda must be nonnegative");
    if (lp_alpha <= 0.0 || lp_alpha >= 1.0) throw config_error("lp_alpha must be in (0,1)");
    if (lp_iters < 1) throw config_error("lp_iters must be >= 1");
}

EpisodeData l2_normalize(const EpisodeData& episode) {
    EpisodeData out = episode;
    for (auto& p : out.points) {
        const double n = p.vector.norm();
        if (n <= 0.0) throw data_error("cannot normalize zero vector for point '" + p.id + "'");
        p.vector /= n;
    }
    return out;
}

std::vector<std::string> validate_episode(const EpisodeData& e) {
    std::vector<std::string> out;
    const int m = e.size();
    if (e.ways < 2) out.push_back("class count C must be >= 2");
    if (e.shots < 1) out.push_back("shots K must be >= 1");
    if (e.queries < 0 || e.unlabeled < 0) out.push_back("negative section size");
    if (m != e.labeled_count() + e.unlabeled + e.queries)
        out.push_back("point count does not match K*C + N + V");

    const int d = e.dim();
    std::unordered_set<std::string> ids;
    std::vector<int> shots_per_class(std::max(e.ways, 0), 0);
    for (int i = 0; i < m; ++i) {
        const auto& p = e.points[i];
        if (!ids.insert(p.id).second) out.push_back("duplicate id '" + p.id + "'");
        if (p.vector.size() != d) out.push_back("inconsistent dimension at '" + p.id + "'");
        if (!p.vector.allFinite()) out.push_back("non-finite feature at '" + p.id + "'");

        const Role expected = i < e.labeled_count() ? Role::Support
                            : i < e.query_offset() ? Role::Unlabeled
                                                   : Role::Query;
        if (p.role != expected) out.push_back("point '" + p.id + "' out of canonical order");
        if (p.role == Role::Support) {
            if (!p.label) {
                out.push_back("support point '" + p.id + "' missing label");
            } else if (*p.label < 0 || *p.label >= e.ways) {
                out.push_back("label out of range at '" + p.id + "'");
            } else {
                ++shots_per_class[*p.label];
            }
        } else if (p.label) {
            out.push_back("non-support point '" + p.id + "' carries a label");
        }
    }
    for (int c = 0; c < e.ways; ++c) {
        if (shots_per_class[c] != e.shots)
            out.push_back("class " + std::to_string(c) + " has " +
                          std::to_string(shots_per_class[c]) + "/" + std::to_string(e.shots) +
                          " shots");
    }
    return out;
}

void require_valid(const EpisodeData& episode) {
    auto report = validate_episode(episode);
    if (!report.empty()) {
        std::string msg = "invalid episode:";
        for (const auto& v : report) msg += "\n  " + v;
        throw data_error(msg);
    }
}

}  // namespace ptn
