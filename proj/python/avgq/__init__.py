"""Average-reward tabular Q-learning: oracles, single-agent and federated learners."""

from ._avgq import (
    Amdp,
    AvgqError,
    InfeasibleEpoch,
    NonConvergence,
    ValidationError,
    epoch_plan,
    evaluate_policy,
    generate,
    load,
    parse,
    run_fed,
    run_single,
    solve_average,
    solve_discounted,
    verify,
)

__all__ = [
    "Amdp",
    "AvgqError",
    "InfeasibleEpoch",
    "NonConvergence",
    "ValidationError",
    "epoch_plan",
    "evaluate_policy",
    "generate",
    "load",
    "parse",
    "run_fed",
    "run_single",
    "solve_average",
    "solve_discounted",
    "verify",
]
