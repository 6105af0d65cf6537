#include "ptn/core.hpp"
#include "ptn/io.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace ptn;
using ptn_test::make_episode;
using ptn_test::RawPoint;

namespace {

EpisodeData parse(const std::string& csv) {
    std::istringstream in(csv);
    return read_episode_csv(in, "test");
}

}  // namespace

TEST_CASE("load maps roles and counts") {
    const auto e = parse(
        "id,role,label,f0,f1\n"
        "s0,S,0,1.0,0.0\n"
        "s1,S,1,0.0,1.0\n"
        "q0,Q,-1,0.5,0.5\n");
    CHECK(e.ways == 2);
    CHECK(e.shots == 1);
    CHECK(e.unlabeled == 0);
    CHECK(e.queries == 1);
    CHECK(e.size() == 3);
    CHECK(e.points[2].id == "q0");
}

TEST_CASE("load reorders into canonical support/unlabeled/query order") {
    const auto e = parse(
        "id,role,label,f0\n"
        "q0,Q,-1,0.5\n"
        "u0,U,-1,0.25\n"
        "s1,S,1,1.0\n"
        "s0,S,0,0.0\n");
    REQUIRE(e.size() == 4);
    CHECK(e.points[0].id == "s0");
    CHECK(e.points[1].id == "s1");
    CHECK(e.points[2].id == "u0");
    CHECK(e.points[3].id == "q0");
}

TEST_CASE("load rejects malformed input") {
    CHECK_THROWS_WITH_AS(parse("id,role,label,f0\ns0,S,0,abc\n"),
                         doctest::Contains("cannot parse number"), data_error);
    CHECK_THROWS_WITH_AS(parse("id,role,label,f0\ns0,S,0,nan\n"),
                         doctest::Contains("non-finite feature"), data_error);
    CHECK_THROWS_AS(parse("id,role,label,f0\nq0,Q,3,0.5\n"), data_error);
    CHECK_THROWS_AS(parse("id,role,label,f0,f1\ns0,S,0,1.0\n"), data_error);
    // label outside [0, C)
    CHECK_THROWS_AS(parse("id,role,label,f0\ns0,S,0,0.0\ns1,S,2,1.0\nq0,Q,-1,0.5\n"), data_error);
}

TEST_CASE("save then load round-trips exactly") {
    const auto e = parse(
        "id,role,label,f0,f1\n"
        "s0,S,0,0.1234567890123,2e-3\n"
        "s1,S,1,-1.5,3.25\n"
        "u0,U,-1,0.0,1.0\n"
        "q0,Q,-1,0.5,0.5\n");
    std::ostringstream out;
    write_episode_csv(e, out);
    const auto e2 = parse(out.str());
    REQUIRE(e2.size() == e.size());
    for (int i = 0; i < e.size(); ++i) {
        CHECK(e2.points[i].id == e.points[i].id);
        CHECK(e2.points[i].role == e.points[i].role);
        CHECK(e2.points[i].vector == e.points[i].vector);
    }
}

TEST_CASE("l2_normalize") {
    auto e = make_episode(2, 1,
                          {{Role::Support, 0, {3.0, 4.0}},
                           {Role::Support, 1, {1.0, 0.0}},
                           {Role::Query, -1, {0.0, 2.0}}});
    const auto n = l2_normalize(e);
    CHECK(n.points[0].vector[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(n.points[0].vector[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(n.points[1].vector[0] == 1.0);

    SUBCASE("idempotent") {
        const auto nn = l2_normalize(n);
        for (int i = 0; i < n.size(); ++i)
            CHECK((nn.points[i].vector - n.points[i].vector).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    SUBCASE("zero vector rejected") {
        e.points[2].vector.setZero();
        CHECK_THROWS_WITH_AS(l2_normalize(e), doctest::Contains("p2"), data_error);
    }
}

TEST_CASE("validate_episode reports violations as data") {
    auto good = make_episode(2, 1,
                             {{Role::Support, 0, {1.0, 0.0}},
                              {Role::Support, 1, {0.0, 1.0}},
                              {Role::Query, -1, {0.5, 0.5}}});
    CHECK(validate_episode(good).empty());

    SUBCASE("missing shots") {
        auto e = good;
        e.points[1].label = 0;
        const auto report = validate_episode(e);
        bool found = false;
        for (const auto& v : report) found |= v.find("class 1 has 0/1 shots") != std::string::npos;
        CHECK(found);
    }
    SUBCASE("duplicate ids") {
        auto e = good;
        e.points[1].id = e.points[0].id;
        const auto report = validate_episode(e);
        bool found = false;
        for (const auto& v : report) found |= v.find("duplicate id") != std::string::npos;
        CHECK(found);
    }
    SUBCASE("does not mutate input") {
        const auto before = good.points[0].vector;
        (void)validate_episode(good);
        CHECK(good.points[0].vector == before);
    }
}

TEST_CASE("config file parsing and validation") {
    SolverConfig cfg;
    apply_config_entry(cfg, "mu", "2.5");
    apply_config_entry(cfg, "m1", "3");
    apply_config_entry(cfg, "tau", "0.25");
    CHECK(cfg.mu == 2.5);
    CHECK(cfg.m1 == 3);
    CHECK(cfg.tau == 0.25);
    CHECK_THROWS_AS(apply_config_entry(cfg, "bogus", "1"), config_error);

    SolverConfig bad;
    bad.tau = 0.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = SolverConfig{};
    bad.clip_lo = 1.0;
    bad.clip_hi = 0.5;
    CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("default config matches the published hyperparameters") {
    const SolverConfig cfg;
    CHECK(cfg.mu == 1.5);
    CHECK(cfg.m1 == 20);
    CHECK(cfg.m2 == 40);
    CHECK(cfg.m3 == 100);
    CHECK(cfg.phi == 10.0);
    CHECK(cfg.clip_lo == 0.5);
    CHECK(cfg.clip_hi == 1.0);
    CHECK(cfg.knn_k == 30);
    CHECK(cfg.tp_max == 100);
    CHECK(cfg.lambda == 1.0);
}
