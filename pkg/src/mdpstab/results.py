"""Answer types shared by the checkers and a helper for exact closed-loop analysis."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .model import Mdp, StochasticUpdateStrategy, induce_chain
from .numerics.chains import ChainStats, chain_long_run_stats

YES = "Yes"
NO = "No"
BUDGET_EXCEEDED = "BudgetExceeded"


class InvalidEps(ValueError):
    def __init__(self, eps):
        super().__init__(f"eps must be positive, got {eps}")
        self.eps = eps


class InfeasibleSolution(ValueError):
    """A frequency solution handed to a synthesis routine violates its system."""


@dataclass(frozen=True)
class CheckResult:
    kind: str
    answer: str
    u: Fraction
    v: Fraction
    witness: Any = None

    @property
    def yes(self) -> bool:
        return self.answer == YES


def exact_stats(mdp: Mdp, strategy: StochasticUpdateStrategy, start: str | None = None) -> ChainStats:
    """Exact ``E[mp]`` and the three variances of ``strategy`` from ``start``."""
    return chain_long_run_stats(induce_chain(mdp, strategy, start))


def check_eps(eps) -> Fraction:
    eps = Fraction(eps)
    if eps <= 0:
        raise InvalidEps(eps)
    return eps


VARIANCE_FIELD = {"global": "global_variance", "local": "local_variance", "hybrid": "hybrid_variance"}


def achieved(stats: ChainStats, kind: str) -> tuple:
    """``(E[mp], variance of the given kind)`` from exact chain statistics."""
    return stats.mean_payoff, getattr(stats, VARIANCE_FIELD[kind])


def verify_witness(mdp: Mdp, start: str, kind: str, strategy: StochasticUpdateStrategy, u, v) -> bool:
    """Exact closed-loop check that ``strategy`` achieves ``(E[mp], variance) <= (u, v)``."""
    strategy.validate(mdp)
    e, var = achieved(exact_stats(mdp, strategy, start), kind)
    return e <= Fraction(u) and var <= Fraction(v)
