#include "avgq/oracle.hpp"

#include "avgq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace avgq {

namespace {

constexpr double kDamping = 0.5;
constexpr int kReferenceState = 0;

double expect(std::span<const double> row, std::span<const double> values) {
    double acc = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        acc += row[j] * values[j];
    }
    return acc;
}

// (T h)(s) = max_a [ r(s,a) + P(.|s,a) h ]
void bellman_apply(const Amdp& mdp, std::span<const double> h, std::span<double> out) {
    for (int s = 0; s < mdp.S; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < mdp.A; ++a) {
            best = std::max(best, mdp.reward(s, a) + expect(mdp.row(s, a), h));
        }
        out[static_cast<std::size_t>(s)] = best;
    }
}

} // namespace

double bellman_residual(const Amdp& mdp, double gain, const VTable& bias) {
    std::vector<double> th(static_cast<std::size_t>(mdp.S));
    bellman_apply(mdp, bias.values(), th);
    double worst = 0.0;
    for (int s = 0; s < mdp.S; ++s) {
        worst = std::max(worst, std::abs(th[static_cast<std::size_t>(s)] - gain - bias[s]));
    }
    return worst;
}

QTable bias_q(const Amdp& mdp, const VTable& bias) {
    QTable q(mdp.S, mdp.A);
    for (int s = 0; s < mdp.S; ++s) {
        for (int a = 0; a < mdp.A; ++a) {
            q(s, a) = mdp.reward(s, a) + expect(mdp.row(s, a), bias.values());
        }
    }
    return q;
}

GainBias solve_average(const Amdp& mdp, double tol, long max_iters) {
    const auto n = static_cast<std::size_t>(mdp.S);
    std::vector<double> h(n, 0.0);
    std::vector<double> th(n, 0.0);
    std::vector<double> diff(n, 0.0);
    double span = std::numeric_limits<double>::infinity();
    long iter = 0;
    for (; iter < max_iters; ++iter) {
        bellman_apply(mdp, h, th);
        for (std::size_t s = 0; s < n; ++s) {
            diff[s] = th[s] - h[s];
        }
        span = span_norm(diff);
        if (span <= tol) {
            break;
        }
        const double ref = th[kReferenceState];
        for (std::size_t s = 0; s < n; ++s) {
            h[s] = (1.0 - kDamping) * h[s] + kDamping * (th[s] - ref);
        }
    }
    if (span > tol) {
        throw NonConvergence(iter, span);
    }

    GainBias out;
    // h(0) stays exactly 0 throughout, so (T h)(0) is the gain estimate.
    out.gain = th[kReferenceState] - h[kReferenceState];
    const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
    const double center = 0.5 * (*hi + *lo);
    for (auto& x : h) {
        x -= center;
    }
    out.bias = VTable(std::move(h));
    out.span = span_norm(out.bias);
    out.residual = bellman_residual(mdp, out.gain, out.bias);
    out.iterations = iter;
    return out;
}

DiscountedSolution solve_discounted(const Amdp& mdp, double gamma, double tol, long max_iters) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw ValidationError("discount must lie in [0,1)");
    }
    QTable q(mdp.S, mdp.A);
    QTable next(mdp.S, mdp.A);
    auto sweep = [&](const QTable& from, QTable& to) {
        const VTable v = value_of(from);
        double change = 0.0;
        for (int s = 0; s < mdp.S; ++s) {
            for (int a = 0; a < mdp.A; ++a) {
                const double value =
                    (1.0 - gamma) * mdp.reward(s, a) + gamma * expect(mdp.row(s, a), v.values());
                change = std::max(change, std::abs(value - from(s, a)));
                to(s, a) = value;
            }
        }
        return change;
    };

    double residual = std::numeric_limits<double>::infinity();
    long iter = 0;
    for (; iter < max_iters; ++iter) {
        residual = sweep(q, next);
        std::swap(q, next);
        if (residual <= tol) {
            break;
        }
    }
    if (residual > tol) {
        throw NonConvergence(iter, residual);
    }
    DiscountedSolution out;
    out.gamma = gamma;
    out.residual = sweep(q, next);
    out.v = value_of(q);
    out.q = std::move(q);
    out.iterations = iter + 1;
    return out;
}

VTable evaluate_policy_average(const Amdp& mdp, const DeterministicPolicy& pi, double tol,
                               long max_iters) {
    const InducedChain chain = induced_chain(mdp, pi);
    const auto n = static_cast<std::size_t>(chain.S);
    std::vector<double> d(chain.r);
    std::vector<double> next(n);
    double change = std::numeric_limits<double>::infinity();
    long iter = 0;
    for (; iter < max_iters; ++iter) {
        change = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const std::span<const double> row(chain.P.data() + s * n, n);
            const double value = (1.0 - kDamping) * d[s] + kDamping * expect(row, d);
            change = std::max(change, std::abs(value - d[s]));
            next[s] = value;
        }
        std::swap(d, next);
        if (change <= tol) {
            break;
        }
    }
    if (change > tol) {
        throw NonConvergence(iter, change);
    }
    return VTable(std::move(d));
}

AnalysisBundle analysis_bundle(const Amdp& mdp, const GainBias& solution, int k) {
    if (k < 1) {
        throw ValidationError("analysis index k must be >= 1");
    }
    AnalysisBundle out;
    out.k = k;
    out.gain = solution.gain;
    const auto values = solution.bias.values();
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    out.shift_c = 0.5 * (*hi + *lo);

    out.v_star = VTable(mdp.S);
    for (int s = 0; s < mdp.S; ++s) {
        out.v_star[s] = solution.bias[s] - out.shift_c;
    }
    out.q_star = bias_q(mdp, out.v_star);
    for (double& x : out.q_star.values()) {
        x -= solution.gain;
    }
    out.v_k = VTable(mdp.S);
    for (int s = 0; s < mdp.S; ++s) {
        out.v_k[s] = solution.gain + out.v_star[s] / k;
    }
    out.q_k_next = QTable(mdp.S, mdp.A);
    const double kk = static_cast<double>(k);
    for (int s = 0; s < mdp.S; ++s) {
        for (int a = 0; a < mdp.A; ++a) {
            out.q_k_next(s, a) = mdp.reward(s, a) / (kk + 1.0) +
                                 kk / (kk + 1.0) * expect(mdp.row(s, a), out.v_k.values());
        }
    }
    return out;
}

AnalysisBundle analysis_bundle(const Amdp& mdp, int k, double tol) {
    return analysis_bundle(mdp, solve_average(mdp, tol), k);
}

} // namespace avgq
