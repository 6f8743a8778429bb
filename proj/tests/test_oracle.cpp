#include "avgq/errors.hpp"
#include "avgq/generators.hpp"
#include "avgq/oracle.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace avgq;

namespace {

// Gaussian elimination with partial pivoting; a is n x n row-major.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r * n + c]) > std::abs(a[pivot * n + c])) {
                pivot = r;
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::swap(a[c * n + k], a[pivot * n + k]);
        }
        std::swap(b[c], b[pivot]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r * n + c] / a[c * n + c];
            for (std::size_t k = c; k < n; ++k) {
                a[r * n + k] -= f * a[c * n + k];
            }
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t k = r + 1; k < n; ++k) {
            acc -= a[r * n + k] * x[k];
        }
        x[r] = acc / a[r * n + r];
    }
    return x;
}

// Gain of an ergodic policy from its stationary distribution.
double stationary_gain(const Amdp& mdp, const DeterministicPolicy& pi) {
    const auto chain = induced_chain(mdp, pi);
    const auto n = static_cast<std::size_t>(mdp.S);
    // rows: (P^T - I) mu = 0, last row replaced by sum mu = 1
    std::vector<double> a(n * n, 0.0);
    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a[i * n + j] = chain.P[j * n + i] - (i == j ? 1.0 : 0.0);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        a[(n - 1) * n + j] = 1.0;
    }
    b[n - 1] = 1.0;
    const auto mu = solve_linear(a, b);
    double gain = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        gain += mu[s] * chain.r[s];
    }
    return gain;
}

// max over all A^S deterministic policies
double brute_force_gain(const Amdp& mdp) {
    DeterministicPolicy pi{std::vector<int>(static_cast<std::size_t>(mdp.S), 0)};
    double best = -1.0;
    while (true) {
        best = std::max(best, stationary_gain(mdp, pi));
        std::size_t s = 0;
        while (s < pi.action.size() && ++pi.action[s] == mdp.A) {
            pi.action[s++] = 0;
        }
        if (s == pi.action.size()) {
            return best;
        }
    }
}

} // namespace

TEST_CASE("solve_average on a single state") {
    const auto g = solve_average(test::single_state(0.7));
    CHECK(g.gain == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(g.bias[0] == 0.0);
    CHECK(g.span == 0.0);
}

TEST_CASE("solve_average on the periodic two-state cycle") {
    const auto g = solve_average(test::cycle2());
    CHECK(std::abs(g.gain - 0.5) <= 1e-12);
    CHECK(std::abs(g.bias[0] - 0.25) <= 1e-12);
    CHECK(std::abs(g.bias[1] + 0.25) <= 1e-12);
    CHECK(std::abs(g.span - 0.5) <= 1e-12);
}

TEST_CASE("solve_average matches policy enumeration on random models") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Amdp mdp = test::random_mdp(4, 3, seed);
        const auto g = solve_average(mdp);
        CHECK(std::abs(g.gain - brute_force_gain(mdp)) <= 1e-9);
        CHECK(bellman_residual(mdp, g.gain, g.bias) <= 2 * kOracleTolerance);
        CHECK(g.span == doctest::Approx(span_norm(g.bias)));
        const auto values = g.bias.values();
        CHECK(std::abs(*std::max_element(values.begin(), values.end()) +
                       *std::min_element(values.begin(), values.end())) <= 1e-14);
    }
}

TEST_CASE("solve_average residual on a Dirichlet model") {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::RandomDirichlet;
    spec.S = 5;
    spec.A = 3;
    spec.seed = 42;
    const Amdp mdp = generate_mdp(spec);
    const auto g = solve_average(mdp);
    CHECK(bellman_residual(mdp, g.gain, g.bias) <= 1e-8);
}

TEST_CASE("solve_average reports non-convergence") {
    CHECK_THROWS_AS(solve_average(test::random_mdp(5, 2, 3), 1e-12, 2), NonConvergence);
}

TEST_CASE("solve_discounted closed forms") {
    const auto one = solve_discounted(test::single_state(0.7), 0.9, 1e-14);
    CHECK(one.q(0, 0) == doctest::Approx(0.7).epsilon(1e-12));

    const double gamma = 0.9;
    const auto cyc = solve_discounted(test::cycle2(), gamma, 1e-14);
    CHECK(cyc.v[0] == doctest::Approx(1.0 / (1.0 + gamma)).epsilon(1e-12));
    CHECK(cyc.v[1] == doctest::Approx(gamma / (1.0 + gamma)).epsilon(1e-12));
    for (int s = 0; s < 2; ++s) {
        CHECK(std::abs(cyc.v[s] - 0.5) <= 4 * (1 - gamma) * 0.5);
    }
}

TEST_CASE("solve_discounted fixed point and range") {
    const Amdp mdp = test::random_mdp(5, 3, 11);
    const double tol = 1e-10;
    const auto d = solve_discounted(mdp, 0.95, tol);
    CHECK(d.residual <= tol);
    CHECK(d.v == value_of(d.q));
    for (double x : d.q.values()) {
        CHECK(x >= -tol);
        CHECK(x <= 1 + tol);
    }
    CHECK_THROWS_AS(solve_discounted(mdp, 1.0), ValidationError);
}

TEST_CASE("discount/average gap bound on random models") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Amdp mdp = test::random_mdp(4, 2, 100 + seed);
        const auto g = solve_average(mdp, 1e-13);
        for (double gamma : {0.9, 0.99, 0.999}) {
            const auto d = solve_discounted(mdp, gamma, 1e-13);
            for (int s = 0; s < mdp.S; ++s) {
                CHECK(std::abs(d.v[s] - g.gain) <= 4 * (1 - gamma) * g.span);
            }
            // one Bellman step away from V adds at most (1-gamma)|r - J*|
            CHECK(inf_norm_gap(d.q, g.gain) <= (1 - gamma) * (1 + 4 * g.span));
        }
    }
}

TEST_CASE("suboptimal actions escape the span-only bound on Q") {
    // one state, rewards (1, 0): J* = 1, span 0, yet Q_g(0,1) = g
    Amdp mdp(1, 2);
    mdp.prob(0, 0, 0) = 1.0;
    mdp.prob(0, 1, 0) = 1.0;
    mdp.reward(0, 0) = 1.0;
    const auto g = solve_average(mdp);
    CHECK(g.span == 0.0);
    const auto d = solve_discounted(mdp, 0.9, 1e-14);
    CHECK(d.q(0, 1) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(inf_norm_gap(d.q, g.gain) > 4 * (1 - 0.9) * g.span);
}

TEST_CASE("evaluate_policy_average") {
    const auto absorbing = evaluate_policy_average(test::single_state(0.3), DeterministicPolicy{{0}});
    CHECK(absorbing[0] == doctest::Approx(0.3).epsilon(1e-12));

    const auto cyc = evaluate_policy_average(test::cycle2(), DeterministicPolicy{{0, 0}});
    CHECK(cyc[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cyc[1] == doctest::Approx(0.5).epsilon(1e-12));

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Amdp mdp = test::random_mdp(5, 3, 200 + seed);
        const auto g = solve_average(mdp);
        const auto pi = greedy_policy(bias_q(mdp, g.bias));
        const auto j = evaluate_policy_average(mdp, pi);
        for (int s = 0; s < mdp.S; ++s) {
            CHECK(std::abs(j[s] - g.gain) <= 1e-6);
        }
    }
}

TEST_CASE("evaluate_policy_average separates closed classes") {
    // two absorbing states with different rewards and a transient state splitting 30/70
    Amdp mdp(3, 1);
    mdp.prob(0, 0, 0) = 1.0;
    mdp.prob(1, 0, 1) = 1.0;
    mdp.prob(2, 0, 0) = 0.3;
    mdp.prob(2, 0, 1) = 0.7;
    mdp.reward(0, 0) = 1.0;
    mdp.reward(1, 0) = 0.0;
    mdp.reward(2, 0) = 0.5;
    const auto j = evaluate_policy_average(mdp, DeterministicPolicy{{0, 0, 0}});
    CHECK(j[0] == doctest::Approx(1.0));
    CHECK(j[1] == doctest::Approx(0.0));
    CHECK(j[2] == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("analysis bundle examples") {
    const auto one = analysis_bundle(test::single_state(0.7), 5);
    CHECK(one.v_star[0] == 0.0);
    CHECK(std::abs(one.q_star(0, 0)) <= 1e-14);
    CHECK(one.q_k_next(0, 0) == doctest::Approx(0.7).epsilon(1e-13));

    const auto cyc = analysis_bundle(test::cycle2(), 1);
    CHECK(cyc.v_k[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(cyc.v_k[1] == doctest::Approx(0.25).epsilon(1e-12));

    const Amdp mdp = test::random_mdp(5, 3, 77);
    const auto b = analysis_bundle(mdp, 3, 1e-13);
    for (int s = 0; s < mdp.S; ++s) {
        for (int a = 0; a < mdp.A; ++a) {
            CHECK(std::abs(b.q_k_next(s, a) - (b.gain + b.q_star(s, a) / 4.0)) <= 1e-10);
        }
        CHECK(b.v_k[s] == doctest::Approx(b.gain + b.v_star[s] / 3.0));
    }
    const auto sol = solve_average(mdp, 1e-13);
    // centering makes the normalized value half the span in sup norm
    double vn = 0.0;
    for (double x : b.v_star.values()) {
        vn = std::max(vn, std::abs(x));
    }
    CHECK(vn == doctest::Approx(sol.span / 2).epsilon(1e-10));
    CHECK_THROWS_AS(analysis_bundle(mdp, 0), ValidationError);
}
