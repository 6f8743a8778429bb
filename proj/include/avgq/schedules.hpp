#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace avgq {

enum class ScheduleKind { SingleGroup1, SingleGroup2, FedGroup1, FedGroup2, PolicyLearning };

std::string_view to_string(ScheduleKind kind);
/// Accepts the CLI short names (sg1, sg2, fg1, fg2, policy).
ScheduleKind parse_schedule_kind(std::string_view name);

bool is_federated(ScheduleKind kind);
/// Kinds whose step size decays within an epoch (t-dependent rate).
bool is_group1(ScheduleKind kind);

struct ScheduleConfig {
    ScheduleKind kind = ScheduleKind::SingleGroup2;
    double c_N = 1.0;
    int M = 1;
    double delta = 0.1;
    int S = 1;
    int A = 1;
    /// Desk-scale override: every epoch gets exactly this many iterations.
    std::optional<long> force_nk;
    /// Test hook: added to every step size. Zero outside of self-checks.
    double eta_perturbation = 0.0;

    /// True when the run departs from the formulas as written (forced N_k).
    bool overrides_theory() const { return force_nk.has_value(); }
};

struct EpochPlan {
    int k = 0;
    long N = 0;
    double gamma = 0.0;
    /// Ascending iteration indices in [1, N] at which agents aggregate. Multiplicity is
    /// kept: the policy-learning schedule can map several of its terms to one iteration.
    std::vector<long> comm_set;
    std::optional<long> g;
};

/// Throws InfeasibleEpoch when gamma_k falls outside (0,1).
EpochPlan epoch_plan(const ScheduleConfig& cfg, int k);

/// eta_{k,t}. `iterations_through_k` is sum_{i<=k} N_i (used by the Group-2 rates).
double learning_rate(const ScheduleConfig& cfg, const EpochPlan& plan, long t,
                     long iterations_through_k);

/// g_k = ceil(-log((1-gamma_k)^2) / eta_{k,N_k}) for the Group-1 kinds.
long comm_interval(const ScheduleConfig& cfg, const EpochPlan& plan);

struct HistoricalIndex {
    int epoch = 0;
    long iteration = 0;
    bool operator==(const HistoricalIndex&) const = default;
};

/// Which stored estimate feeds the bootstrap value at (k, t).
HistoricalIndex historical_index(const ScheduleConfig& cfg, int k, long t,
                                 const std::vector<long>& comm_set, long previous_N);

/// Checks every epoch up to K: gamma in (0,1), every eta in (0,1], and N_k >= 2 g_k for
/// the Group-1 kinds. Throws InfeasibleEpoch naming the first failure.
void validate_schedule(const ScheduleConfig& cfg, int K);

/// Plans for epochs 1..K with the running iteration totals.
struct SchedulePlan {
    std::vector<EpochPlan> epochs;
    std::vector<long> prefix;  // prefix[k-1] = sum_{i<=k} N_i
};
SchedulePlan plan_schedule(const ScheduleConfig& cfg, int K);

} // namespace avgq
