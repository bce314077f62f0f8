"""Uniform access to the three achievability checkers."""

from __future__ import annotations

from fractions import Fraction

from .global_var import GlobalChecker, synthesize_global
from .hybrid_var import HybridChecker, synthesize_hybrid
from .local_var import DEFAULT_PAIR_BUDGET, LocalChecker, synthesize_local
from .model import Mdp, StochasticUpdateStrategy
from .results import CheckResult

KINDS = ("global", "local", "hybrid")


def make_checker(kind: str, mdp: Mdp, s0: str | None = None, eps=Fraction(1, 100), method: str = "hull",
                 pair_budget: int | None = DEFAULT_PAIR_BUDGET):
    if kind == "global":
        return GlobalChecker(mdp, s0, eps, method)
    if kind == "hybrid":
        return HybridChecker(mdp, s0, eps, method)
    if kind == "local":
        return LocalChecker(mdp, s0, pair_budget)
    raise ValueError(f"unknown variance kind {kind!r}")


def witness_key(result: CheckResult) -> tuple:
    """Hashable identity of a Yes witness (equal keys give equal strategies)."""
    w = result.witness
    if result.kind == "local":
        rho = tuple((s, tuple(sorted(d.items()))) for s, d in sorted(w.rho.items()))
        return ("local", w.pi.key(), w.pi_alt.key(), rho)
    return (result.kind, tuple(sorted(w.assignment.items())))


def synthesize_for(checker, result: CheckResult) -> StochasticUpdateStrategy:
    w = result.witness
    if result.kind == "global":
        return synthesize_global(checker.mdp, checker.s0, w.assignment, w.mec_values)
    if result.kind == "hybrid":
        return synthesize_hybrid(checker.mdp, checker.s0, w.assignment)
    return synthesize_local(w)
