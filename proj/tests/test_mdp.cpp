#include "avgq/errors.hpp"
#include "avgq/mdp.hpp"
#include "avgq/oracle.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <filesystem>

using namespace avgq;

TEST_CASE("validate accepts a degenerate one-state model") {
    CHECK_NOTHROW(validate(test::single_state(0.7)));
}

TEST_CASE("validate rejects rows that do not sum to one") {
    Amdp mdp(2, 1);
    mdp.prob(0, 0, 0) = 0.5;
    mdp.prob(0, 0, 1) = 0.6;
    mdp.prob(1, 0, 1) = 1.0;
    try {
        validate(mdp);
        FAIL("expected RowSumError");
    } catch (const RowSumError& e) {
        CHECK(e.state == 0);
        CHECK(e.action == 0);
        CHECK(e.actual == doctest::Approx(1.1));
    }
}

TEST_CASE("validate rejects rewards outside [0,1]") {
    Amdp mdp = test::single_state(1.5);
    CHECK_THROWS_AS(validate(mdp), RewardRangeError);
    mdp.reward(0, 0) = -0.1;
    CHECK_THROWS_AS(validate(mdp), RewardRangeError);
}

TEST_CASE("row sum tolerance is 1e-12") {
    Amdp mdp(2, 1);
    mdp.prob(0, 0, 0) = 0.5;
    mdp.prob(0, 0, 1) = 0.5 + 5e-13;
    mdp.prob(1, 0, 1) = 1.0;
    CHECK_NOTHROW(validate(mdp));
    mdp.prob(0, 0, 1) = 0.5 + 5e-12;
    CHECK_THROWS_AS(validate(mdp), RowSumError);
}

TEST_CASE("greedy policy picks the maximum with lowest-index ties") {
    CHECK(greedy_policy(QTable(1, 2, {0.1, 0.9})).action == std::vector<int>{1});
    CHECK(greedy_policy(QTable(1, 2, {0.5, 0.5})).action == std::vector<int>{0});
    CHECK(greedy_policy(QTable(4, 3)).action == std::vector<int>(4, 0));
}

TEST_CASE("value_of takes the row maximum") {
    CHECK(value_of(QTable(1, 2, {0.2, 0.8}))[0] == 0.8);
    const VTable zero = value_of(QTable(3, 2));
    for (int s = 0; s < 3; ++s) {
        CHECK(zero[s] == 0.0);
    }
}

TEST_CASE("value_of of the discounted cycle optimum is the closed form") {
    const double gamma = 0.9;
    const auto sol = solve_discounted(test::cycle2(), gamma, 1e-14);
    const VTable v = value_of(sol.q);
    CHECK(v[0] == doctest::Approx(1.0 / (1.0 + gamma)).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(gamma / (1.0 + gamma)).epsilon(1e-12));
}

TEST_CASE("span norm") {
    CHECK(span_norm(VTable(std::vector<double>{3, 3, 3})) == 0.0);
    CHECK(span_norm(VTable(std::vector<double>{0.25, -0.25})) == 0.5);
    CHECK(solve_average(test::cycle2()).span == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("inf norm gap") {
    CHECK(inf_norm_gap(QTable(2, 2, 0.5), 0.5) == 0.0);
    CHECK(inf_norm_gap(QTable(1, 2, {0.4, 0.7}), 0.5) == doctest::Approx(0.2));
    const double gamma = 0.9;
    const auto sol = solve_discounted(test::cycle2(), gamma, 1e-14);
    // 1/(1+gamma) - 1/2 = 0.0263157...
    CHECK(inf_norm_gap(sol.q, 0.5) == doctest::Approx(1.0 / (1.0 + gamma) - 0.5).epsilon(1e-10));
}

TEST_CASE("induced chain copies the chosen rows") {
    const auto one = induced_chain(test::single_state(0.7), DeterministicPolicy{{0}});
    CHECK(one.P == std::vector<double>{1.0});
    CHECK(one.r == std::vector<double>{0.7});

    const auto cyc = induced_chain(test::cycle2(), DeterministicPolicy{{0, 0}});
    CHECK(cyc.P == std::vector<double>{0, 1, 1, 0});
    CHECK(cyc.r == std::vector<double>{1, 0});

    const Amdp mdp = test::random_mdp(3, 2, 5);
    const DeterministicPolicy pi{{1, 0, 1}};
    const auto chain = induced_chain(mdp, pi);
    for (int s = 0; s < 3; ++s) {
        double total = 0.0;
        for (int n = 0; n < 3; ++n) {
            CHECK(chain.P[static_cast<std::size_t>(s * 3 + n)] == mdp.prob(s, pi.action[s], n));
            total += chain.P[static_cast<std::size_t>(s * 3 + n)];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(chain.r[static_cast<std::size_t>(s)] == mdp.reward(s, pi.action[s]));
    }
}

TEST_CASE("greedy policy and value_of agree on random tables") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> grid(0, 3);
    for (int trial = 0; trial < 500; ++trial) {
        QTable q(4, 3);
        for (double& x : q.values()) {
            x = grid(rng) / 3.0;
        }
        const auto pi = greedy_policy(q);
        const auto v = value_of(q);
        for (int s = 0; s < 4; ++s) {
            REQUIRE(q(s, pi.action[s]) == v[s]);
            for (int a = 0; a < pi.action[s]; ++a) {
                REQUIRE(q(s, a) < v[s]);
            }
        }
    }
}

TEST_CASE("span norm is shift invariant") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(-10.0, 10.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> x(7);
        for (double& e : x) {
            e = unit(rng);
        }
        const double c = unit(rng) * 5;
        std::vector<double> shifted(x);
        for (double& e : shifted) {
            e += c;
        }
        REQUIRE(std::abs(span_norm(shifted) - span_norm(x)) <= 1e-12);
    }
}

TEST_CASE("MDP file round trip and validation on load") {
    const auto dir = std::filesystem::temp_directory_path() / "avgq_test_mdp";
    std::filesystem::create_directories(dir);
    const Amdp mdp = test::random_mdp(3, 2, 9);
    save_mdp(mdp, dir / "m.json");
    const Amdp back = load_mdp(dir / "m.json");
    CHECK(back.S == 3);
    CHECK(back.A == 2);
    CHECK(back.P == mdp.P);
    CHECK(back.r == mdp.r);

    CHECK_THROWS_AS(parse_mdp(R"({"S":1,"A":1,"P":[[[0.5]]],"r":[[0.1]]})"), RowSumError);
    CHECK_THROWS_AS(parse_mdp(R"({"S":1,"A":1,"P":[[[1.0]]],"r":[[2.0]]})"), RewardRangeError);
    CHECK_THROWS_AS(parse_mdp(R"({"S":2,"A":1,"P":[[[1.0]]],"r":[[0.0]]})"), ValidationError);
    CHECK_THROWS_AS(parse_mdp("not json"), ValidationError);
}
