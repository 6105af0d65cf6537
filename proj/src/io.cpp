#include "ptn/io.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ptn {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::string& origin, int lineno) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw data_error(origin + ":" + std::to_string(lineno) + ": cannot parse number '" + s + "'");
    }
}

int parse_int(const std::string& s, const std::string& origin, int lineno) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw data_error(origin + ":" + std::to_string(lineno) + ": cannot parse integer '" + s + "'");
    return v;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file '" + path + "'");
    return in;
}

}  // namespace

EpisodeData read_episode_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw data_error(origin + ": empty file");
    auto header = split_csv(line);
    if (header.size() < 4 || header[0] != "id" || header[1] != "role" || header[2] != "label")
        throw data_error(origin + ":1: expected header id,role,label,f0,...");
    const int d = static_cast<int>(header.size()) - 3;

    std::vector<FeaturePoint> support, extra, query;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != d + 3)
            throw data_error(origin + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(d + 3) + " fields, got " + std::to_string(fields.size()));
        FeaturePoint p;
        p.id = fields[0];
        p.role = role_from_tag(fields[1]);
        const int label = parse_int(fields[2], origin, lineno);
        if (p.role == Role::Support) {
            if (label < 0)
                throw data_error(origin + ":" + std::to_string(lineno) + ": support row needs a label");
            p.label = label;
        } else if (label != -1) {
            throw data_error(origin + ":" + std::to_string(lineno) +
                             ": non-support row must carry label -1");
        }
        p.vector.resize(d);
        for (int j = 0; j < d; ++j) {
            const double v = parse_double(fields[3 + j], origin, lineno);
            if (!std::isfinite(v))
                throw data_error(origin + ":" + std::to_string(lineno) + ": non-finite feature");
            p.vector[j] = v;
        }
        switch (p.role) {
            case Role::Support: support.push_back(std::move(p)); break;
            case Role::Unlabeled: extra.push_back(std::move(p)); break;
            case Role::Query: query.push_back(std::move(p)); break;
        }
    }

    EpisodeData e;
    int max_label = -1;
    for (const auto& p : support) max_label = std::max(max_label, *p.label);
    e.ways = max_label + 1;
    if (e.ways < 1) throw data_error(origin + ": no support points");
    if (static_cast<int>(support.size()) % e.ways != 0)
        throw data_error(origin + ": support count not divisible by class count");
    e.shots = static_cast<int>(support.size()) / e.ways;
    e.unlabeled = static_cast<int>(extra.size());
    e.queries = static_cast<int>(query.size());

    // Canonical order: supports sorted by (label, file order), then unlabeled, then queries.
    std::stable_sort(support.begin(), support.end(),
                     [](const FeaturePoint& a, const FeaturePoint& b) { return *a.label < *b.label; });
    e.points.reserve(support.size() + extra.size() + query.size());
    for (auto& p : support) e.points.push_back(std::move(p));
    for (auto& p : extra) e.points.push_back(std::move(p));
    for (auto& p : query) e.points.push_back(std::move(p));

    require_valid(e);
    return e;
}

EpisodeData load_feature_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_episode_csv(in, path);
}

void write_episode_csv(const EpisodeData& e, std::ostream& out) {
    out << "id,role,label";
    for (int j = 0; j < e.dim(); ++j) out << ",f" << j;
    out << "\n";
    out.precision(17);
    for (const auto& p : e.points) {
        out << p.id << "," << role_tag(p.role) << "," << (p.label ? *p.label : -1);
        for (int j = 0; j < p.vector.size(); ++j) out << "," << p.vector[j];
        out << "\n";
    }
}

void save_feature_file(const EpisodeData& episode, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write file '" + path + "'");
    write_episode_csv(episode, out);
}

FeaturePool load_pool_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw data_error(path + ": empty file");
    auto header = split_csv(line);
    if (header.size() < 4 || header[0] != "id" || header[1] != "role" || header[2] != "label")
        throw data_error(path + ":1: expected header id,role,label,f0,...");
    const int d = static_cast<int>(header.size()) - 3;

    FeaturePool pool;
    std::vector<Vec> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != d + 3)
            throw data_error(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(d + 3) + " fields");
        const int label = parse_int(fields[2], path, lineno);
        if (label < 0)
            throw data_error(path + ":" + std::to_string(lineno) + ": pool rows must be labeled");
        Vec v(d);
        for (int j = 0; j < d; ++j) {
            v[j] = parse_double(fields[3 + j], path, lineno);
            if (!std::isfinite(v[j]))
                throw data_error(path + ":" + std::to_string(lineno) + ": non-finite feature");
        }
        pool.ids.push_back(fields[0]);
        pool.labels.push_back(label);
        rows.push_back(std::move(v));
        pool.classes = std::max(pool.classes, label + 1);
    }
    pool.features.resize(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) pool.features.row(i) = rows[i].transpose();
    return pool;
}

ContrastiveBatch load_views_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw data_error(path + ": empty file");
    auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "view")
        throw data_error(path + ":1: expected header id,view,f0,...");
    const int d = static_cast<int>(header.size()) - 2;

    std::vector<std::string> order;
    std::vector<std::pair<std::string, Vec>> a_rows, b_rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != d + 2)
            throw data_error(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(d + 2) + " fields");
        Vec v(d);
        for (int j = 0; j < d; ++j) v[j] = parse_double(fields[2 + j], path, lineno);
        if (!v.allFinite())
            throw data_error(path + ":" + std::to_string(lineno) + ": non-finite feature");
        if (fields[1] == "A") {
            a_rows.emplace_back(fields[0], std::move(v));
        } else if (fields[1] == "B") {
            b_rows.emplace_back(fields[0], std::move(v));
        } else {
            throw data_error(path + ":" + std::to_string(lineno) + ": view must be A or B");
        }
    }
    if (a_rows.size() != b_rows.size() || a_rows.empty())
        throw data_error(path + ": views must have equal nonzero row counts");

    ContrastiveBatch batch;
    batch.view_a.resize(a_rows.size(), d);
    batch.view_b.resize(b_rows.size(), d);
    for (std::size_t i = 0; i < a_rows.size(); ++i) {
        // Pairing is by id; B rows may appear in any order.
        auto it = std::find_if(b_rows.begin(), b_rows.end(),
                               [&](const auto& r) { return r.first == a_rows[i].first; });
        if (it == b_rows.end())
            throw data_error(path + ": no B view for id '" + a_rows[i].first + "'");
        batch.view_a.row(i) = a_rows[i].second.transpose();
        batch.view_b.row(i) = it->second.transpose();
    }
    return batch;
}

void apply_config_entry(SolverConfig& cfg, const std::string& key, const std::string& value) {
    auto as_double = [&] { return parse_double(value, "config", 0); };
    auto as_int = [&] { return parse_int(value, "config", 0); };
    if (key == "mu") cfg.mu = as_double();
    else if (key == "m1") cfg.m1 = as_int();
    else if (key == "m2") cfg.m2 = as_int();
    else if (key == "m3") cfg.m3 = as_int();
    else if (key == "phi") cfg.phi = as_double();
    else if (key == "clip_lo") cfg.clip_lo = as_double();
    else if (key == "clip_hi") cfg.clip_hi = as_double();
    else if (key == "knn_k") cfg.knn_k = as_int();
    else if (key == "tp_max") cfg.tp_max = as_int();
    else if (key == "tau") cfg.tau = as_double();
    else if (key == "lambda") cfg.lambda = as_double();
    else if (key == "lp_alpha") cfg.lp_alpha = as_double();
    else if (key == "lp_iters") cfg.lp_iters = as_int();
    else if (key == "lp_tol") cfg.lp_tol = as_double();
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_int());
    else throw config_error("unknown config key '" + key + "'");
}

SolverConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    SolverConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        try {
            apply_config_entry(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const data_error& e) {
            throw config_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace ptn
