#pragma once

#include "avgq/errors.hpp"
#include "avgq/mdp.hpp"
#include "avgq/oracle.hpp"
#include "avgq/run_record.hpp"
#include "avgq/schedules.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace avgq {

/// Estimates lie in [0,1] up to this slack; anything further out is reported.
inline constexpr double kBoundSlack = 1e-12;

class BoundsViolation : public Error {
public:
    using Error::Error;
};

struct RunOptions {
    /// Gain used for err_inf; rows carry NaN without it.
    std::optional<double> oracle_gain;
    int threads = 1;
    /// Every agent replays agent 0's draws.
    bool shared_stream = false;
    /// Number of simulated agents for run_fed; 0 means cfg.M.
    int agents = 0;
    bool check_bounds = true;
    /// Called with (k, Q_{k,N_k}) after every epoch.
    std::function<void(int, const QTable&)> on_epoch_end;
};

// ---- single agent -------------------------------------------------------------------------

struct LearnerState {
    int k = 0;
    long t = 0;
    QTable q;
    VTable v_hist;  // V at the historical index iota(k,t)
};

/// One synchronous step of the discounted Q-update on every (s,a):
/// q <- (1-eta) q + eta ((1-gamma) r + gamma v_hist(s')).
void q_update(const Amdp& mdp, LearnerState& state, const EpochPlan& plan, double eta,
              std::span<const int> next_states);

struct SingleRunResult {
    QTable q;
    RunRecord record;
};

SingleRunResult run_single(const Amdp& mdp, const ScheduleConfig& cfg, int K, std::uint64_t seed,
                           const RunOptions& options = {});

// ---- federated ----------------------------------------------------------------------------

struct FedState {
    std::vector<QTable> local_q;
    QTable global_q;
    VTable global_v;  // bootstrap table shared by all agents since the last aggregation
    long comm_count = 0;

    FedState() = default;
    FedState(int agents, int states, int actions);
};

/// Agent m's local step; reads only fed.global_v for bootstrapping.
void local_update(const Amdp& mdp, FedState& fed, int m, const EpochPlan& plan, double eta,
                  std::span<const int> next_states_m);

/// Entrywise mean of the local tables (pairwise sum of offsets from agent 0), refreshes global_v, and
/// resynchronizes every agent.
void aggregate(FedState& fed);

struct FedRunResult {
    QTable q;
    DeterministicPolicy policy;
    RunRecord record;
    long comm_count = 0;
    long samples_per_agent = 0;
};

FedRunResult run_fed(const Amdp& mdp, const ScheduleConfig& cfg, int K, std::uint64_t seed,
                     const RunOptions& options = {});

} // namespace avgq
