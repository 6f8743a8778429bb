#pragma once

#include "avgq/mdp.hpp"

namespace avgq {

inline constexpr double kOracleTolerance = 1e-10;
inline constexpr long kOracleMaxIterations = 1'000'000;

/// Optimal gain J*, bias h* centered so that max h* + min h* = 0.
struct GainBias {
    double gain = 0.0;
    VTable bias;
    double span = 0.0;
    double residual = 0.0;
    long iterations = 0;
};

/// Normalized discounted optimum: q = (1-gamma) r + gamma P value_of(q).
struct DiscountedSolution {
    double gamma = 0.0;
    QTable q;
    VTable v;
    double residual = 0.0;
    long iterations = 0;
};

/// Normalized optimal value functions and the 1/k auxiliary sequence built on them.
struct AnalysisBundle {
    int k = 1;
    double gain = 0.0;
    VTable v_star;    // h* - c with c = (max h* + min h*) / 2
    QTable q_star;    // r + P v_star - J*
    double shift_c = 0.0;
    VTable v_k;       // J* + v_star / k
    QTable q_k_next;  // r/(k+1) + k/(k+1) P v_k
};

/// Relative value iteration on the aperiodicity-transformed operator
/// h <- (1-alpha) h + alpha (T h - (T h)(0)), alpha = 1/2.
/// Stops once span(T h - h) <= tol; the gain is (T h)(0).
GainBias solve_average(const Amdp& mdp, double tol = kOracleTolerance,
                       long max_iters = kOracleMaxIterations);

DiscountedSolution solve_discounted(const Amdp& mdp, double gamma, double tol = kOracleTolerance,
                                    long max_iters = kOracleMaxIterations);

/// Per-start-state long-run average reward of a fixed policy (Cesaro limit of the
/// induced chain, computed through the lazy chain (I + P)/2, which shares it and is aperiodic).
VTable evaluate_policy_average(const Amdp& mdp, const DeterministicPolicy& pi,
                               double tol = 1e-12, long max_iters = kOracleMaxIterations);

AnalysisBundle analysis_bundle(const Amdp& mdp, int k, double tol = kOracleTolerance);
AnalysisBundle analysis_bundle(const Amdp& mdp, const GainBias& solution, int k);

/// max_s |(T h)(s) - gain - h(s)| for the undiscounted Bellman optimality operator.
double bellman_residual(const Amdp& mdp, double gain, const VTable& bias);

/// Q(s,a) = r(s,a) + sum_s' P(s'|s,a) h(s').
QTable bias_q(const Amdp& mdp, const VTable& bias);

} // namespace avgq
