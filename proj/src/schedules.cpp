#include "avgq/schedules.hpp"

#include "avgq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace avgq {

namespace {

std::string describe(const char* what, double value) {
    std::ostringstream os;
    os.precision(17);
    os << what << " = " << value;
    return os.str();
}

long ceil_to_long(double x) { return static_cast<long>(std::ceil(x)); }

// log factors of the Group-2 epoch lengths, each floored at 1
double log_sa_delta(const ScheduleConfig& cfg) {
    return std::max(1.0, std::log(static_cast<double>(cfg.S) * cfg.A / cfg.delta));
}
double log_k(int k) { return std::max(1.0, std::log(static_cast<double>(k) + 1.0)); }

long epoch_length(const ScheduleConfig& cfg, int k) {
    if (cfg.force_nk) {
        return *cfg.force_nk;
    }
    const double kk = static_cast<double>(k);
    switch (cfg.kind) {
    case ScheduleKind::SingleGroup1:
    case ScheduleKind::FedGroup1:
    case ScheduleKind::PolicyLearning:
        return ceil_to_long(cfg.c_N) * (1L << k);
    case ScheduleKind::SingleGroup2:
        return std::max(1L, ceil_to_long(cfg.c_N * kk * kk * std::pow(log_k(k), 5) *
                                         std::pow(log_sa_delta(cfg), 3)));
    case ScheduleKind::FedGroup2: {
        const double M = cfg.M;
        const double bulk = kk * kk / M * std::pow(log_k(k), 5) * std::pow(log_sa_delta(cfg), 3);
        const double floor_term = std::log(M * kk * log_sa_delta(cfg));
        return std::max(1L, ceil_to_long(cfg.c_N * std::max(bulk, floor_term)));
    }
    }
    return 0;
}

double discount(const ScheduleConfig& cfg, int k, long N) {
    const double n = static_cast<double>(N);
    const double M = cfg.M;
    switch (cfg.kind) {
    case ScheduleKind::SingleGroup1:
        return 1.0 - 2.0 * std::log(4.0 * n) / std::cbrt(n);
    case ScheduleKind::FedGroup1:
        return 1.0 - 2.0 * std::log(4.0 * M * n) / std::cbrt(M * n);
    case ScheduleKind::SingleGroup2:
    case ScheduleKind::FedGroup2:
        return static_cast<double>(k) / (static_cast<double>(k) + 1.0);
    case ScheduleKind::PolicyLearning:
        return 1.0 - 1.0 / std::pow(n * M, 0.2);
    }
    return 0.0;
}

std::vector<long> policy_comm_set(long N, double gamma) {
    const double ratio = (1.0 + gamma) / 2.0;
    const long terms = ceil_to_long(4.0 * std::log(1.0 - gamma) / std::log(ratio));
    std::vector<long> out;
    out.reserve(static_cast<std::size_t>(std::max(terms, 1L)));
    for (long i = 1; i <= terms; ++i) {
        out.push_back(ceil_to_long(static_cast<double>(N) * std::pow(ratio, static_cast<double>(i - 1))));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

std::string_view to_string(ScheduleKind kind) {
    switch (kind) {
    case ScheduleKind::SingleGroup1: return "sg1";
    case ScheduleKind::SingleGroup2: return "sg2";
    case ScheduleKind::FedGroup1: return "fg1";
    case ScheduleKind::FedGroup2: return "fg2";
    case ScheduleKind::PolicyLearning: return "policy";
    }
    return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
    for (auto kind : {ScheduleKind::SingleGroup1, ScheduleKind::SingleGroup2, ScheduleKind::FedGroup1,
                      ScheduleKind::FedGroup2, ScheduleKind::PolicyLearning}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ValidationError("unknown schedule '" + std::string(name) + "'");
}

bool is_federated(ScheduleKind kind) {
    return kind == ScheduleKind::FedGroup1 || kind == ScheduleKind::FedGroup2 ||
           kind == ScheduleKind::PolicyLearning;
}

bool is_group1(ScheduleKind kind) {
    return kind == ScheduleKind::SingleGroup1 || kind == ScheduleKind::FedGroup1;
}

double learning_rate(const ScheduleConfig& cfg, const EpochPlan& plan, long t, long iterations_through_k) {
    const double tt = static_cast<double>(t);
    const double M = cfg.M;
    const double n = static_cast<double>(plan.N);
    double eta = 0.0;
    switch (cfg.kind) {
    case ScheduleKind::SingleGroup1:
        eta = 1.0 / (1.0 + std::pow(tt, 2.0 / 3.0) / (8.0 * std::log(4.0 * tt)));
        break;
    case ScheduleKind::FedGroup1:
        eta = 1.0 / (1.0 + std::pow(tt, 2.0 / 3.0) / (8.0 * std::cbrt(M) * std::log(4.0 * M * tt)));
        break;
    case ScheduleKind::SingleGroup2:
        eta = 1.0 / (1.0 + n / (4.0 * std::log(static_cast<double>(iterations_through_k))));
        break;
    case ScheduleKind::FedGroup2:
        eta = 1.0 / (1.0 + n / (4.0 * std::log(M * static_cast<double>(iterations_through_k))));
        break;
    case ScheduleKind::PolicyLearning:
        eta = 1.0 / (1.0 + tt / (8.0 * std::pow(n * M, 0.2) * std::log(M * n)));
        break;
    }
    return eta + cfg.eta_perturbation;
}

long comm_interval(const ScheduleConfig& cfg, const EpochPlan& plan) {
    const double eta_last = learning_rate(cfg, plan, plan.N, plan.N);
    const double gap = 1.0 - plan.gamma;
    return ceil_to_long(-std::log(gap * gap) / eta_last);
}

EpochPlan epoch_plan(const ScheduleConfig& cfg, int k) {
    if (k < 1) {
        throw ValidationError("epoch index must be >= 1");
    }
    EpochPlan plan;
    plan.k = k;
    plan.N = epoch_length(cfg, k);
    if (plan.N < 1) {
        throw InfeasibleEpoch(k, "N_k < 1");
    }
    plan.gamma = discount(cfg, k, plan.N);
    if (!(plan.gamma > 0.0 && plan.gamma < 1.0)) {
        throw InfeasibleEpoch(k, describe("gamma", plan.gamma));
    }
    switch (cfg.kind) {
    case ScheduleKind::SingleGroup1:
        break;
    case ScheduleKind::SingleGroup2:
    case ScheduleKind::FedGroup2:
        plan.comm_set = {plan.N};
        break;
    case ScheduleKind::FedGroup1: {
        const long g = comm_interval(cfg, plan);
        if (g < 1) {
            throw InfeasibleEpoch(k, "communication interval g_k < 1");
        }
        plan.g = g;
        for (long i = g; i <= plan.N; i += g) {
            plan.comm_set.push_back(i);
        }
        if (plan.comm_set.empty() || plan.comm_set.back() != plan.N) {
            plan.comm_set.push_back(plan.N);
        }
        break;
    }
    case ScheduleKind::PolicyLearning:
        plan.comm_set = policy_comm_set(plan.N, plan.gamma);
        break;
    }
    return plan;
}

HistoricalIndex historical_index(const ScheduleConfig& cfg, int k, long t,
                                 const std::vector<long>& comm_set, long previous_N) {
    switch (cfg.kind) {
    case ScheduleKind::SingleGroup1:
        return {k, t - 1};
    case ScheduleKind::SingleGroup2:
    case ScheduleKind::FedGroup2:
        return {k - 1, previous_N};
    case ScheduleKind::FedGroup1:
    case ScheduleKind::PolicyLearning: {
        const auto it = std::lower_bound(comm_set.begin(), comm_set.end(), t);
        return {k, it == comm_set.begin() ? 0 : *std::prev(it)};
    }
    }
    return {};
}

SchedulePlan plan_schedule(const ScheduleConfig& cfg, int K) {
    SchedulePlan out;
    long total = 0;
    for (int k = 1; k <= K; ++k) {
        out.epochs.push_back(epoch_plan(cfg, k));
        total += out.epochs.back().N;
        out.prefix.push_back(total);
    }
    return out;
}

void validate_schedule(const ScheduleConfig& cfg, int K) {
    if (cfg.M < 1) {
        throw ValidationError("M must be >= 1");
    }
    if (!(cfg.c_N > 0.0)) {
        throw ValidationError("c_N must be positive");
    }
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
        throw ValidationError("delta must lie in (0,1)");
    }
    if (cfg.S < 1 || cfg.A < 1) {
        throw ValidationError("S and A must be positive");
    }
    if (!is_federated(cfg.kind) && cfg.M != 1) {
        throw ValidationError("single-agent schedules require M = 1");
    }
    long total = 0;
    for (int k = 1; k <= K; ++k) {
        const EpochPlan plan = epoch_plan(cfg, k);
        total += plan.N;
        // every rate is constant or monotone in t, so the endpoints bound the range
        for (long t : {1L, plan.N}) {
            const double eta = learning_rate(cfg, plan, t, total);
            if (!(eta > 0.0 && eta <= 1.0)) {
                throw InfeasibleEpoch(k, describe("eta", eta) + " at t = " + std::to_string(t));
            }
        }
        if (is_group1(cfg.kind)) {
            const long g = comm_interval(cfg, plan);
            if (plan.N < 2 * g) {
                throw InfeasibleEpoch(k, "N_k = " + std::to_string(plan.N) + " < 2 g_k = " +
                                             std::to_string(2 * g));
            }
        }
    }
}

} // namespace avgq
