#include "avgq/qlearn.hpp"
#include "avgq/sampler.hpp"

#include "qlearn_common.hpp"

namespace avgq {

void q_update(const Amdp& mdp, LearnerState& state, const EpochPlan& plan, double eta,
              std::span<const int> next_states) {
    const double gamma = plan.gamma;
    auto values = state.q.values();
    for (std::size_t cell = 0; cell < values.size(); ++cell) {
        const double target = (1.0 - gamma) * mdp.r[cell] + gamma * state.v_hist[next_states[cell]];
        values[cell] = (1.0 - eta) * values[cell] + eta * target;
    }
    ++state.t;
}

SingleRunResult run_single(const Amdp& mdp, const ScheduleConfig& cfg, int K, std::uint64_t seed,
                           const RunOptions& options) {
    if (is_federated(cfg.kind)) {
        throw ValidationError("run_single needs a single-agent schedule (sg1 or sg2)");
    }
    validate_schedule(cfg, K);
    const SchedulePlan schedule = plan_schedule(cfg, K);
    const Sampler sampler(mdp, seed);
    const long cells = static_cast<long>(mdp.pairs());

    LearnerState state;
    state.q = QTable(mdp.S, mdp.A);
    state.v_hist = VTable(mdp.S);

    SingleRunResult out;
    out.record.rows.push_back({0, 0, 0, 0, detail::gap_or_nan(state.q, options), 0.0, 0.0, 1});

    std::vector<int> next(static_cast<std::size_t>(cells));
    long done = 0;
    for (int k = 1; k <= K; ++k) {
        const EpochPlan& plan = schedule.epochs[static_cast<std::size_t>(k - 1)];
        const long through_k = schedule.prefix[static_cast<std::size_t>(k - 1)];
        state.k = k;
        state.t = 0;
        // Q_{k,0} = Q_{k-1,N_{k-1}}; Group 2 bootstraps from its value for the whole epoch
        detail::value_into(state.q, state.v_hist);
        const long stride = detail::metrics_stride(plan.N);
        const bool decaying = is_group1(cfg.kind);
        double eta = learning_rate(cfg, plan, 1, through_k);
        for (long t = 1; t <= plan.N; ++t) {
            sampler.draw(0, k, t, next);
            if (decaying) {
                detail::value_into(state.q, state.v_hist);
                eta = learning_rate(cfg, plan, t, through_k);
            }
            q_update(mdp, state, plan, eta, next);
            if (options.check_bounds) {
                detail::check_bounds(state.q, k, t);
            }
            if (t % stride == 0 || t == plan.N) {
                out.record.rows.push_back({k, done + t, (done + t) * cells, 0,
                                           detail::gap_or_nan(state.q, options), plan.gamma, eta, 1});
            }
        }
        done += plan.N;
        if (options.on_epoch_end) {
            options.on_epoch_end(k, state.q);
        }
    }
    out.q = std::move(state.q);
    return out;
}

} // namespace avgq
