#include "avgq/parallel.hpp"
#include "avgq/qlearn.hpp"
#include "avgq/sampler.hpp"

#include "qlearn_common.hpp"

#include <algorithm>
#include <cstdlib>

namespace avgq {

namespace {

// Below this many cell updates per segment the agents run inline.
constexpr long kParallelSegmentWork = 1L << 15;

// Pairwise sum of (local - base) over agents [lo, hi) at one cell.
double pairwise_offset(const std::vector<QTable>& tables, std::size_t cell, double base, std::size_t lo,
                       std::size_t hi) {
    if (hi - lo == 1) {
        return tables[lo].values()[cell] - base;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_offset(tables, cell, base, lo, mid) + pairwise_offset(tables, cell, base, mid, hi);
}

} // namespace

int threads_from_env() {
    if (const char* raw = std::getenv("AVGQ_THREADS")) {
        const int n = std::atoi(raw);
        if (n > 0) {
            return n;
        }
    }
    return 1;
}

FedState::FedState(int agents, int states, int actions)
    : local_q(static_cast<std::size_t>(agents), QTable(states, actions)), global_q(states, actions),
      global_v(states) {}

void local_update(const Amdp& mdp, FedState& fed, int m, const EpochPlan& plan, double eta,
                  std::span<const int> next_states_m) {
    const double gamma = plan.gamma;
    auto values = fed.local_q[static_cast<std::size_t>(m)].values();
    for (std::size_t cell = 0; cell < values.size(); ++cell) {
        const double target = (1.0 - gamma) * mdp.r[cell] + gamma * fed.global_v[next_states_m[cell]];
        values[cell] = (1.0 - eta) * values[cell] + eta * target;
    }
}

void aggregate(FedState& fed) {
    const std::size_t agents = fed.local_q.size();
    const double M = static_cast<double>(agents);
    auto global = fed.global_q.values();
    for (std::size_t cell = 0; cell < global.size(); ++cell) {
        // shifting by agent 0 keeps identical tables exact for any M
        const double base = fed.local_q[0].values()[cell];
        double lo = base;
        double hi = base;
        for (const auto& local : fed.local_q) {
            lo = std::min(lo, local.values()[cell]);
            hi = std::max(hi, local.values()[cell]);
        }
        global[cell] = std::clamp(base + pairwise_offset(fed.local_q, cell, base, 0, agents) / M, lo, hi);
    }
    detail::value_into(fed.global_q, fed.global_v);
    for (auto& local : fed.local_q) {
        local = fed.global_q;
    }
    ++fed.comm_count;
}

FedRunResult run_fed(const Amdp& mdp, const ScheduleConfig& cfg, int K, std::uint64_t seed,
                     const RunOptions& options) {
    if (!is_federated(cfg.kind)) {
        throw ValidationError("run_fed needs a federated schedule (fg1, fg2 or policy)");
    }
    validate_schedule(cfg, K);
    const SchedulePlan schedule = plan_schedule(cfg, K);
    const int agents = options.agents > 0 ? options.agents : cfg.M;
    const Sampler sampler(mdp, seed, options.shared_stream);
    const long cells = static_cast<long>(mdp.pairs());

    FedState fed(agents, mdp.S, mdp.A);
    FedRunResult out;
    out.record.rows.push_back({0, 0, 0, 0, detail::gap_or_nan(fed.global_q, options), 0.0, 0.0, agents});

    std::vector<std::vector<int>> next(static_cast<std::size_t>(agents),
                                       std::vector<int>(static_cast<std::size_t>(cells)));
    long done = 0;
    for (int k = 1; k <= K; ++k) {
        const EpochPlan& plan = schedule.epochs[static_cast<std::size_t>(k - 1)];
        const long through_k = schedule.prefix[static_cast<std::size_t>(k - 1)];
        // every epoch starts in consensus on Q_{k-1,N_{k-1}}
        for (auto& local : fed.local_q) {
            local = fed.global_q;
        }
        detail::value_into(fed.global_q, fed.global_v);

        const long stride = detail::metrics_stride(plan.N);
        long next_record = stride;
        long position = 0;
        double eta = 0.0;
        const auto& comm = plan.comm_set;
        for (std::size_t c = 0; c < comm.size();) {
            const long until = comm[c];
            if (until > position) {
                const long length = until - position;
                const int threads =
                    length * cells * agents >= kParallelSegmentWork ? options.threads : 1;
                const bool decaying = is_group1(cfg.kind) || cfg.kind == ScheduleKind::PolicyLearning;
                const double flat = learning_rate(cfg, plan, 1, through_k);
                parallel_for(static_cast<std::size_t>(agents), threads, [&](std::size_t m) {
                    auto& buffer = next[m];
                    for (long t = position + 1; t <= until; ++t) {
                        sampler.draw(static_cast<int>(m), k, t, buffer);
                        local_update(mdp, fed, static_cast<int>(m), plan,
                                     decaying ? learning_rate(cfg, plan, t, through_k) : flat, buffer);
                        if (options.check_bounds) {
                            detail::check_bounds(fed.local_q[m], k, t);
                        }
                    }
                });
                eta = learning_rate(cfg, plan, until, through_k);
                position = until;
            }
            // one aggregation per scheduled round, repeats included
            for (; c < comm.size() && comm[c] == until; ++c) {
                aggregate(fed);
            }
            if (until >= next_record || until == plan.N) {
                out.record.rows.push_back({k, done + until, (done + until) * cells, fed.comm_count,
                                           detail::gap_or_nan(fed.global_q, options), plan.gamma, eta,
                                           agents});
                while (next_record <= until) {
                    next_record += stride;
                }
            }
        }
        done += plan.N;
        if (options.on_epoch_end) {
            options.on_epoch_end(k, fed.global_q);
        }
    }
    out.q = fed.global_q;
    out.policy = greedy_policy(out.q);
    out.comm_count = fed.comm_count;
    out.samples_per_agent = done * cells;
    return out;
}

} // namespace avgq
