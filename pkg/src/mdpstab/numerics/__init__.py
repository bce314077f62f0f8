"""Exact linear programming, linear algebra and Markov-chain analysis."""

from .chains import (
    ChainStats,
    absorption_probabilities,
    chain_long_run_stats,
    chain_reach_probabilities,
    stationary_distribution,
)
from .hull import best_on_chain, lower_chain
from .linalg import SingularSystem, solve
from .lp import EQ, GE, LE, LinearProgram, LpOutcome, Status, solve_lp
from .mdp_lp import (
    PayoffInterval,
    TargetNotAlmostSureReachable,
    build_flow_system,
    cumulative_reward_strategy,
    mec_payoff_bounds,
    min_cumulative_reward_as_reach,
)

__all__ = [
    "ChainStats",
    "EQ",
    "GE",
    "LE",
    "LinearProgram",
    "LpOutcome",
    "PayoffInterval",
    "SingularSystem",
    "Status",
    "TargetNotAlmostSureReachable",
    "absorption_probabilities",
    "best_on_chain",
    "build_flow_system",
    "chain_long_run_stats",
    "chain_reach_probabilities",
    "cumulative_reward_strategy",
    "lower_chain",
    "mec_payoff_bounds",
    "min_cumulative_reward_as_reach",
    "solve",
    "solve_lp",
    "stationary_distribution",
]
