#include "avgq/oracle.hpp"
#include "avgq/qlearn.hpp"
#include "avgq/sampler.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace avgq;

namespace {

EpochPlan plan_with(double gamma) {
    EpochPlan plan;
    plan.k = 1;
    plan.N = 1;
    plan.gamma = gamma;
    return plan;
}

// Plain-scalar replay of the single-state recursion, written without the library's tables.
double single_state_replay(double r, const ScheduleConfig& cfg, int K) {
    double q = 0.0;
    long through = 0;
    for (int k = 1; k <= K; ++k) {
        const EpochPlan plan = epoch_plan(cfg, k);
        through += plan.N;
        const double frozen = q;
        for (long t = 1; t <= plan.N; ++t) {
            const double v = cfg.kind == ScheduleKind::SingleGroup1 ? q : frozen;
            const double eta = learning_rate(cfg, plan, t, through);
            q = (1 - eta) * q + eta * ((1 - plan.gamma) * r + plan.gamma * v);
        }
    }
    return q;
}

ScheduleConfig sg2(const Amdp& mdp) {
    ScheduleConfig cfg;
    cfg.kind = ScheduleKind::SingleGroup2;
    cfg.S = mdp.S;
    cfg.A = mdp.A;
    return cfg;
}

} // namespace

TEST_CASE("q_update hand cases") {
    Amdp mdp = test::single_state(1.0);
    LearnerState st{1, 0, QTable(1, 1, 0.4), VTable(1, 0.6)};
    const std::vector<int> next{0};
    q_update(mdp, st, plan_with(0.5), 0.5, next);
    CHECK(st.q(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(st.t == 1);

    const Amdp rnd = test::random_mdp(3, 2, 1);
    LearnerState zero{1, 0, QTable(3, 2, 0.3), VTable(3, 0.0)};
    const std::vector<int> any{0, 1, 2, 0, 1, 2};
    q_update(rnd, zero, plan_with(0.8), 1.0, any);
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < 2; ++a) {
            CHECK(zero.q(s, a) == doctest::Approx(0.2 * rnd.reward(s, a)).epsilon(1e-15));
        }
    }

    LearnerState frozen{1, 0, QTable(3, 2, 0.3), VTable(3, 0.9)};
    const QTable before = frozen.q;
    q_update(rnd, frozen, plan_with(0.8), 0.0, any);
    CHECK(frozen.q == before);
}

TEST_CASE("q_update matches a scalar recomputation") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> dims(1, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        const int S = dims(rng);
        const int A = dims(rng);
        const Amdp mdp = test::random_mdp(S, A, rng());
        LearnerState st{1, 0, QTable(S, A), VTable(S)};
        for (auto& x : st.q.values()) {
            x = unit(rng);
        }
        for (int s = 0; s < S; ++s) {
            st.v_hist[s] = unit(rng);
        }
        std::vector<int> next(mdp.pairs());
        for (auto& n : next) {
            n = std::uniform_int_distribution<int>(0, S - 1)(rng);
        }
        const double gamma = unit(rng);
        const double eta = unit(rng);
        const QTable old = st.q;
        q_update(mdp, st, plan_with(gamma), eta, next);
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const std::size_t c = mdp.pair(s, a);
                const double expect = (1 - eta) * old(s, a) +
                                      eta * ((1 - gamma) * mdp.reward(s, a) + gamma * st.v_hist[next[c]]);
                REQUIRE(std::abs(st.q(s, a) - expect) <= 1e-15);
            }
        }
    }
}

TEST_CASE("K = 0 returns zeros") {
    const Amdp mdp = test::cycle2();
    RunOptions opt;
    opt.oracle_gain = 0.5;
    const auto out = run_single(mdp, sg2(mdp), 0, 1, opt);
    CHECK(out.q == QTable(2, 1));
    REQUIRE(out.record.rows.size() == 1);
    CHECK(out.record.rows[0].err_inf == 0.5);
}

TEST_CASE("single-state run follows the scalar recursion") {
    const Amdp mdp = test::single_state(0.7);
    for (auto kind : {ScheduleKind::SingleGroup2, ScheduleKind::SingleGroup1}) {
        ScheduleConfig cfg = sg2(mdp);
        cfg.kind = kind;
        cfg.c_N = kind == ScheduleKind::SingleGroup1 ? 10'000 : 1;
        const int K = kind == ScheduleKind::SingleGroup1 ? 3 : 10;
        const auto out = run_single(mdp, cfg, K, 3);
        CHECK(out.q(0, 0) == doctest::Approx(single_state_replay(0.7, cfg, K)).epsilon(1e-14));
    }
    // Group 2 discounts multiply out: Q_K ~ 0.7 K/(K+1) once each epoch has converged
    const auto out = run_single(mdp, sg2(mdp), 10, 3);
    CHECK(out.q(0, 0) == doctest::Approx(0.7 * 10 / 11).epsilon(1e-3));
}

TEST_CASE("runs are deterministic and bounded") {
    const Amdp mdp = test::random_mdp(4, 2, 9);
    ScheduleConfig cfg = sg2(mdp);
    RunOptions opt;
    opt.oracle_gain = solve_average(mdp).gain;
    const auto a = run_single(mdp, cfg, 6, 123, opt);
    const auto b = run_single(mdp, cfg, 6, 123, opt);
    CHECK(a.q == b.q);
    CHECK(a.record == b.record);
    CHECK(satisfies_invariants(a.record));
    const auto c = run_single(mdp, cfg, 6, 124, opt);
    CHECK_FALSE(a.q == c.q);
    for (double x : a.q.values()) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
}

TEST_CASE("epochs chain on the previous final table") {
    const Amdp mdp = test::random_mdp(3, 2, 4);
    const ScheduleConfig cfg = sg2(mdp);
    std::vector<QTable> ends;
    RunOptions opt;
    opt.on_epoch_end = [&](int, const QTable& q) { ends.push_back(q); };
    const auto full = run_single(mdp, cfg, 4, 8, opt);
    REQUIRE(ends.size() == 4);
    CHECK(ends.back() == full.q);

    // replay epoch 4 by hand from the stored end of epoch 3
    const SchedulePlan plan = plan_schedule(cfg, 4);
    const EpochPlan& e4 = plan.epochs[3];
    LearnerState st{4, 0, ends[2], value_of(ends[2])};
    const Sampler sampler(mdp, 8);
    for (long t = 1; t <= e4.N; ++t) {
        q_update(mdp, st, e4, learning_rate(cfg, e4, t, plan.prefix[3]), sampler.draw(0, 4, t));
    }
    CHECK(st.q == full.q);
}

TEST_CASE("metrics cadence") {
    const Amdp mdp = test::cycle2();
    const auto out = run_single(mdp, sg2(mdp), 3, 1);
    const SchedulePlan plan = plan_schedule(sg2(mdp), 3);
    std::size_t expected = 1;
    for (const auto& e : plan.epochs) {
        const long stride = std::max(1L, (e.N + 15) / 16);
        expected += static_cast<std::size_t>(e.N / stride + (e.N % stride != 0));
    }
    CHECK(out.record.rows.size() == expected);
    CHECK(out.record.rows.back().iterations == plan.prefix.back());
    CHECK(std::isnan(out.record.rows.back().err_inf));
}

TEST_CASE("federated kinds are rejected") {
    ScheduleConfig cfg;
    cfg.kind = ScheduleKind::FedGroup2;
    CHECK_THROWS_AS(run_single(test::cycle2(), cfg, 1, 0), ValidationError);
}
