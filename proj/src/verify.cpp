#include "avgq/harness.hpp"
#include "avgq/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace avgq {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

// Worst deviation of sum_i eta_i prod_{j>i}(1-eta_j) + prod_j (1-eta_j) from 1 over t <= horizon,
// and the worst excess of eta_i prod_{j>i}(1-eta_j) over eta_t for t <= domination_horizon.
struct RateIdentity {
    double telescoping = 0.0;
    double domination = 0.0;
};

RateIdentity rate_identities(const ScheduleConfig& cfg, long horizon, long domination_horizon) {
    EpochPlan plan;
    plan.k = 1;
    plan.N = horizon;
    RateIdentity out;
    out.domination = -1.0;
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(horizon));
    double untouched = 1.0;
    for (long t = 1; t <= horizon; ++t) {
        const double eta = learning_rate(cfg, plan, t, horizon);
        for (double& w : weights) {
            w *= 1.0 - eta;
        }
        weights.push_back(eta);
        untouched *= 1.0 - eta;
        double total = untouched;
        for (double w : weights) {
            total += w;
        }
        out.telescoping = std::max(out.telescoping, std::abs(total - 1.0));
        if (t <= domination_horizon) {
            for (double w : weights) {
                out.domination = std::max(out.domination, w - eta);
            }
        }
    }
    return out;
}

} // namespace

std::vector<PropertyResult> verify_suite(std::ostream& out, const VerifyOptions& options) {
    std::vector<PropertyResult> results;
    auto report = [&](std::string name, bool passed, std::string detail) {
        out << (passed ? "[PASS] " : "[FAIL] ") << name << "  " << detail << '\n';
        results.push_back({std::move(name), passed, std::move(detail)});
    };

    const std::vector<Amdp> battery = random_battery(options.battery_size);
    std::vector<GainBias> solutions;
    for (const auto& mdp : battery) {
        solutions.push_back(solve_average(mdp, 1e-13));
    }

    // learning-rate identities, single and federated Group-1 rates
    for (int M : {1, 8}) {
        ScheduleConfig cfg;
        cfg.kind = M == 1 ? ScheduleKind::SingleGroup1 : ScheduleKind::FedGroup1;
        cfg.M = M;
        cfg.eta_perturbation = options.eta_perturbation;
        const RateIdentity id = rate_identities(cfg, 10'000, 1'000);
        const std::string tag = std::string(to_string(cfg.kind));
        report("lr telescoping identity (" + tag + ", t<=1e4)", id.telescoping <= 1e-9,
               fmt("worst |sum-1| = %.3e", id.telescoping));
        report("lr domination (" + tag + ", i<=t<=1e3)", id.domination <= 1e-15,
               fmt("worst excess = %.3e", id.domination));
    }

    // every step size the learners would use stays in (0,1]
    {
        double worst_low = 1.0;
        double worst_high = 0.0;
        for (auto kind : {ScheduleKind::SingleGroup1, ScheduleKind::SingleGroup2, ScheduleKind::FedGroup1,
                          ScheduleKind::FedGroup2, ScheduleKind::PolicyLearning}) {
            ScheduleConfig cfg;
            cfg.kind = kind;
            cfg.M = is_federated(kind) ? 4 : 1;
            cfg.eta_perturbation = options.eta_perturbation;
            EpochPlan plan;
            plan.k = 1;
            for (long N : {16L, 1024L, 65536L}) {
                plan.N = N;
                for (long t = 1; t <= N; t = t < 64 ? t + 1 : t * 2) {
                    const double eta = learning_rate(cfg, plan, t, N);
                    worst_low = std::min(worst_low, eta);
                    worst_high = std::max(worst_high, eta);
                }
            }
        }
        report("step sizes lie in (0,1]", worst_low > 0.0 && worst_high <= 1.0,
               fmt("min = %.6f, max = %.6f", worst_low, worst_high));
    }

    // Bellman residual, re-evaluated independently
    double worst_residual = 0.0;
    for (std::size_t i = 0; i < battery.size(); ++i) {
        worst_residual = std::max(worst_residual, bellman_residual(battery[i], solutions[i].gain, solutions[i].bias));
    }
    report("average-reward Bellman residual", worst_residual <= 2e-13, fmt("worst = %.3e", worst_residual));

    // discounted / average gap bound
    double worst_ratio = 0.0;    // literal |Q - J*| / (4(1-g) span), informational
    double worst_v_ratio = 0.0;
    double worst_q_ratio = 0.0;  // against (1-g)(1 + 4 span)
    double worst_contraction = 0.0;
    for (std::size_t i = 0; i < battery.size(); ++i) {
        for (double gamma : {0.9, 0.99, 0.999}) {
            const DiscountedSolution d = solve_discounted(battery[i], gamma, 1e-13);
            const double span = solutions[i].span;
            const double gap_q = inf_norm_gap(d.q, solutions[i].gain);
            double gap_v = 0.0;
            for (int s = 0; s < battery[i].S; ++s) {
                gap_v = std::max(gap_v, std::abs(d.v[s] - solutions[i].gain));
            }
            worst_ratio = std::max(worst_ratio, gap_q / (4.0 * (1.0 - gamma) * span));
            worst_v_ratio = std::max(worst_v_ratio, gap_v / (4.0 * (1.0 - gamma) * span));
            worst_q_ratio = std::max(worst_q_ratio, gap_q / ((1.0 - gamma) * (1.0 + 4.0 * span)));
        }
        // successive discounted iterates shrink by at least gamma
        const double gamma = 0.9;
        QTable q(battery[i].S, battery[i].A);
        double previous = -1.0;
        for (int it = 0; it < 30; ++it) {
            const VTable v = value_of(q);
            QTable next(q.states(), q.actions());
            double change = 0.0;
            for (int s = 0; s < q.states(); ++s) {
                for (int a = 0; a < q.actions(); ++a) {
                    double e = 0.0;
                    for (int sp = 0; sp < q.states(); ++sp) {
                        e += battery[i].prob(s, a, sp) * v[sp];
                    }
                    next(s, a) = (1 - gamma) * battery[i].reward(s, a) + gamma * e;
                    change = std::max(change, std::abs(next(s, a) - q(s, a)));
                }
            }
            if (previous > 1e-14) {
                worst_contraction = std::max(worst_contraction, change / previous);
            }
            previous = change;
            q = next;
        }
    }
    report("discount/average gap |V*_g - J*| <= 4(1-g) span", worst_v_ratio <= 1.0,
           fmt("worst ratio = %.4f", worst_v_ratio));
    report("discount/average gap |Q*_g - J*| <= (1-g)(1 + 4 span)", worst_q_ratio <= 1.0,
           fmt("worst ratio = %.4f", worst_q_ratio));
    // suboptimal actions sit (1-g)|r - J*| below V, which the span alone cannot bound
    out << "[INFO] |Q*_g - J*| / (4(1-g) span)  worst ratio = " << fmt("%.4f", worst_ratio) << '\n';
    report("discounted VI contraction <= gamma", worst_contraction <= 0.9 + 1e-9,
           fmt("worst factor = %.6f", worst_contraction));

    // auxiliary 1/k sequence
    double worst_identity = 0.0;
    double worst_max = 0.0;
    double worst_norm_slack = -1e300;
    double worst_vstar = 0.0;
    for (std::size_t i = 0; i < battery.size(); ++i) {
        for (int k = 1; k <= 20; ++k) {
            const AnalysisBundle b = analysis_bundle(battery[i], solutions[i], k);
            for (int s = 0; s < battery[i].S; ++s) {
                double best = -1e300;
                for (int a = 0; a < battery[i].A; ++a) {
                    worst_identity = std::max(
                        worst_identity, std::abs(b.q_k_next(s, a) - (b.gain + b.q_star(s, a) / (k + 1.0))));
                    best = std::max(best, b.gain + b.q_star(s, a) / k);
                }
                worst_max = std::max(worst_max, std::abs(best - b.v_k[s]));
            }
            double qn = 0.0;
            for (double x : b.q_k_next.values()) {
                qn = std::max(qn, std::abs(x));
            }
            worst_norm_slack = std::max(worst_norm_slack, qn - (1.0 + (2.0 + solutions[i].span) / (k + 1.0)));
        }
        const AnalysisBundle b = analysis_bundle(battery[i], solutions[i], 1);
        double vn = 0.0;
        for (double x : b.v_star.values()) {
            vn = std::max(vn, std::abs(x));
        }
        worst_vstar = std::max(worst_vstar, std::abs(vn - 0.5 * solutions[i].span));
    }
    report("Q_{k+1}* = J* + Q*/(k+1), k<=20", worst_identity <= 1e-10, fmt("worst = %.3e", worst_identity));
    report("max_a Q_k* = V_k*, k<=20", worst_max <= 1e-12, fmt("worst = %.3e", worst_max));
    report("||Q_{k+1}*|| <= 1 + (2+span)/(k+1)", worst_norm_slack <= 0.0, fmt("worst slack = %.3e", worst_norm_slack));
    report("centered ||V*||_inf = span/2", worst_vstar <= 1e-10, fmt("worst = %.3e", worst_vstar));

    // model-level invariants on random tables
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst_shift = 0.0;
        bool consistent = true;
        for (int trial = 0; trial < 200; ++trial) {
            QTable q(5, 3);
            for (double& x : q.values()) {
                x = std::floor(unit(rng) * 4.0) / 4.0;  // coarse grid forces ties
            }
            const auto pi = greedy_policy(q);
            const auto v = value_of(q);
            for (int s = 0; s < 5; ++s) {
                consistent = consistent && q(s, pi.action[static_cast<std::size_t>(s)]) == v[s];
            }
            std::vector<double> x(6);
            for (double& e : x) {
                e = unit(rng) * 10.0 - 5.0;
            }
            const double c = unit(rng) * 100.0 - 50.0;
            std::vector<double> shifted(x);
            for (double& e : shifted) {
                e += c;
            }
            worst_shift = std::max(worst_shift, std::abs(span_norm(shifted) - span_norm(x)));
        }
        report("greedy policy attains value_of", consistent, "200 random tables");
        report("span shift invariance", worst_shift <= 1e-12, fmt("worst = %.3e", worst_shift));
    }

    // sampler marginals
    {
        Amdp mdp(3, 1);
        mdp.prob(0, 0, 0) = 0.2;
        mdp.prob(0, 0, 1) = 0.3;
        mdp.prob(0, 0, 2) = 0.5;
        for (int s = 1; s < 3; ++s) {
            mdp.prob(s, 0, s) = 1.0;
        }
        const Sampler sampler(mdp, 11);
        std::vector<double> counts(3, 0.0);
        const long n = 100'000;
        for (long t = 1; t <= n; ++t) {
            counts[static_cast<std::size_t>(sampler.draw(0, 1, t)[0])] += 1.0;
        }
        const double dev = std::max({std::abs(counts[0] / n - 0.2), std::abs(counts[1] / n - 0.3),
                                     std::abs(counts[2] / n - 0.5)});
        report("sampler marginal frequencies (n=1e5)", dev <= 0.01, fmt("worst deviation = %.4f", dev));
    }

    // schedule structure
    {
        ScheduleConfig cfg;
        cfg.kind = ScheduleKind::SingleGroup1;
        cfg.force_nk.reset();
        cfg.c_N = 10'000;
        double previous = 2.0;
        bool monotone = true;
        for (int k = 1; k <= 12; ++k) {
            const double gap = 1.0 - epoch_plan(cfg, k).gamma;
            monotone = monotone && gap < previous;
            previous = gap;
        }
        report("sg1 1-gamma_k strictly decreasing (c_N=1e4, k<=12)", monotone, "");

        ScheduleConfig fed;
        fed.kind = ScheduleKind::FedGroup1;
        fed.M = 4;
        fed.c_N = 2000;
        bool count_ok = true;
        for (int k = 1; k <= 8; ++k) {
            const EpochPlan p = epoch_plan(fed, k);
            const long expected = p.N / *p.g + (p.N % *p.g != 0 ? 1 : 0);
            count_ok = count_ok && static_cast<long>(p.comm_set.size()) == expected;
        }
        report("fg1 |C(k)| = floor(N/g) + [N mod g != 0]", count_ok, "c_N=2000, M=4, k<=8");

        ScheduleConfig pol;
        pol.kind = ScheduleKind::PolicyLearning;
        pol.M = 4;
        pol.c_N = 100;
        bool contains = true;
        for (int k = 1; k <= 10; ++k) {
            const EpochPlan p = epoch_plan(pol, k);
            contains = contains && p.comm_set.back() == p.N;
        }
        report("policy C(k) contains N_k", contains, "c_N=100, M=4, k<=10");
    }

    // federated degeneracy on a random model
    {
        const Amdp& mdp = battery.front();
        ScheduleConfig single;
        single.kind = ScheduleKind::SingleGroup2;
        single.S = mdp.S;
        single.A = mdp.A;
        ScheduleConfig fed = single;
        fed.kind = ScheduleKind::FedGroup2;
        const QTable a = run_single(mdp, single, 6, 3).q;
        const QTable b = run_fed(mdp, fed, 6, 3).q;
        report("M=1 fg2 equals sg2 bit-for-bit", a == b, "");
        RunOptions shared;
        shared.shared_stream = true;
        shared.agents = 4;
        const QTable c = run_fed(mdp, fed, 6, 3, shared).q;
        report("shared-stream M=4 equals M=1", c == b, "");
    }

    return results;
}

} // namespace avgq
