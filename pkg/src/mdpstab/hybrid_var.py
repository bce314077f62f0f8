"""Hybrid variance: squared deviation of step rewards from the expected mean payoff.

The achievable ``(E[mp], E[hv])`` points are described by a linear flow
system over transient flows ``y`` and recurrent frequencies ``x``, with
``E[hv] = sum x r**2 - (sum x r)**2``.  The quadratic part depends on ``x``
only through the two linear forms ``m = sum x r`` and ``q = sum x r**2``, so
the decision reduces to the lower boundary of the ``(m, q)`` projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .graph import mec_decomposition
from .model import Mdp, StochasticUpdateStrategy, UnknownTarget, format_fraction
from .numerics.hull import best_on_chain, lower_chain, sweep_search, variance_score
from .numerics.lp import EQ, solve_lp
from .numerics.mdp_lp import FlowSystem, build_flow_system, x_var, y_var, ys_var
from .global_var import tau_for, two_phase_strategy
from .results import NO, YES, CheckResult, InfeasibleSolution, check_eps, exact_stats

ZERO = Fraction(0)
ONE = Fraction(1)
DEFAULT_EPS = Fraction(1, 100)


@dataclass
class SystemLH:
    """The linear rows of the hybrid system plus the two forms entering the quadratic bound."""

    flow: FlowSystem
    mean_row: dict
    square_row: dict

    @property
    def lp(self):
        return self.flow.lp


def build_system_LH(mdp: Mdp, s0: str) -> SystemLH:
    flow = build_flow_system(mdp, s0, recurrent=True)
    mean, square = {}, {}
    for m in flow.mecs:
        for a in m.actions:
            r = mdp.action(a).reward
            if r:
                mean[x_var(a)] = r
                square[x_var(a)] = r * r
    return SystemLH(flow, mean, square)


def _recurrent_frequencies(mdp: Mdp, assignment: dict) -> dict:
    return {a: assignment.get(x_var(a), ZERO) for a in mdp.action_ids if assignment.get(x_var(a), ZERO) > 0}


def synthesize_hybrid(mdp: Mdp, s0: str, assignment: dict) -> StochasticUpdateStrategy:
    """2-memory strategy realising a solution of the hybrid system.

    The positive-frequency actions split into closed strongly connected
    pieces.  A transient flow is recomputed so that the run switches to the
    second memory element only inside those pieces, each piece receiving
    exactly its frequency mass; afterwards actions are played in proportion
    to their frequencies.
    """
    system = build_system_LH(mdp, s0)
    full = {v: assignment.get(v, ZERO) for v in system.lp.variables}
    if not system.lp.satisfied_by(full):
        raise InfeasibleSolution("assignment violates the hybrid flow system")
    freq = _recurrent_frequencies(mdp, assignment)
    pieces = mec_decomposition(mdp, list(freq))
    if {a for p in pieces for a in p.actions} != set(freq):  # pragma: no cover - balanced flows decompose
        raise InfeasibleSolution("recurrent frequencies are not supported on closed components")

    # transient flow that switches only at states of the pieces
    target = {s for p in pieces for s in p.states}
    reroute = build_flow_system(mdp, s0, recurrent=False).lp
    switchable = set(reroute.variables)
    for s in mdp.states:
        if ys_var(s) in switchable and s not in target:
            reroute.add_constraint({ys_var(s): 1}, EQ, 0)
    for p in pieces:
        mass = sum((freq[a] for a in p.actions), ZERO)
        reroute.add_constraint({ys_var(s): 1 for s in p.states}, EQ, mass)
    out = solve_lp(reroute)
    if not out.feasible:
        raise InfeasibleSolution("no transient flow reaches the recurrent pieces with the required masses")

    move = {}
    for p in pieces:
        for s in p.states:
            acts = [a.id for a in mdp.act(s) if a.id in p.actions]
            total = sum((freq[a] for a in acts), ZERO)
            move[s] = {a: freq[a] / total for a in acts}
    return two_phase_strategy(mdp, s0, out.assignment, move)


@dataclass
class HybridWitness:
    assignment: dict
    expectation: Fraction
    hybrid_variance: Fraction
    strategy: StochasticUpdateStrategy = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "expectation": format_fraction(self.expectation),
            "hybrid_variance": format_fraction(self.hybrid_variance),
            "strategy": self.strategy.to_dict() if self.strategy else None,
        }


class HybridChecker:
    """Repeated hybrid-variance queries for one ``(mdp, s0, eps)``."""

    def __init__(self, mdp: Mdp, s0: str | None = None, eps=DEFAULT_EPS, method: str = "hull"):
        self.mdp = mdp
        self.s0 = mdp.initial if s0 is None else s0
        if not mdp.has_state(self.s0):
            raise UnknownTarget("start", self.s0)
        self.eps = check_eps(eps)
        if method not in ("hull", "sweep"):
            raise ValueError(f"unknown method {method!r}")
        self.method = method
        self.tau = tau_for(mdp, self.eps)
        self.system = build_system_LH(mdp, self.s0)
        self._chain = None

    @property
    def chain(self) -> list:
        if self._chain is None:
            self._chain = lower_chain(self.system.lp, self.system.mean_row, self.system.square_row)
        return self._chain

    def prepare(self) -> None:
        self.chain

    def minimum(self, u):
        """Least ``E[hv]`` over solutions with ``E[mp] <= u`` (``None`` if there are none)."""
        best = best_on_chain(self.chain, u, variance_score)
        return None if best is None else best[0]

    def _search(self, u, v):
        if self.method == "sweep":
            return sweep_search(
                self.system.lp, self.system.mean_row, self.system.square_row, u, v, self.tau,
                self.mdp.min_reward, self.mdp.max_reward,
            )
        best = best_on_chain(self.chain, u, variance_score)
        if best is None or best[0] > v:
            return None
        return best[1].assignment

    def check(self, u, v, synthesize: bool = True) -> CheckResult:
        u, v = Fraction(u), Fraction(v)
        asg = self._search(u, v)
        if asg is None:
            return CheckResult("hybrid", NO, u, v)
        m = sum((c * asg[k] for k, c in self.system.mean_row.items()), ZERO)
        q = sum((c * asg[k] for k, c in self.system.square_row.items()), ZERO)
        witness = HybridWitness(asg, m, q - m * m)
        if synthesize:
            witness.strategy = synthesize_hybrid(self.mdp, self.s0, asg)
        return CheckResult("hybrid", YES, u, v, witness)


def approx_check_hybrid(mdp: Mdp, s0: str, u, v, eps=DEFAULT_EPS, method: str = "hull") -> CheckResult:
    return HybridChecker(mdp, s0, eps, method).check(u, v)


# ---------------------------------------------------------------- relation between the three variances


@dataclass
class RelationReport:
    mean_payoff: Fraction
    global_variance: Fraction
    local_variance: Fraction
    hybrid_variance: Fraction
    mean_square: Fraction
    simulated: object = None

    @property
    def sum_side(self) -> Fraction:
        return self.global_variance + self.local_variance

    @property
    def square_side(self) -> Fraction:
        return self.mean_square - self.mean_payoff ** 2

    @property
    def holds(self) -> bool:
        return self.hybrid_variance == self.sum_side == self.square_side

    def to_dict(self) -> dict:
        ff = format_fraction
        out = {
            "mean_payoff": ff(self.mean_payoff),
            "global_variance": ff(self.global_variance),
            "local_variance": ff(self.local_variance),
            "hybrid_variance": ff(self.hybrid_variance),
            "global_plus_local": ff(self.sum_side),
            "mean_square_minus_square_mean": ff(self.square_side),
            "exact_agreement": self.holds,
        }
        if self.simulated is not None:
            s = self.simulated
            out["simulated"] = {
                "hybrid_variance": s.hybrid_variance,
                "global_plus_local": s.global_variance + s.local_variance,
                "stderr": s.relation_stderr,
                "agreement": s.relation_agrees(),
            }
        return out


def check_relation(mdp: Mdp, strategy: StochasticUpdateStrategy, s0: str | None = None, mc_params=None) -> RelationReport:
    """Exact ``E[hv]`` against ``Var[mp] + E[lv]`` and ``E[mp_{r^2}] - E[mp]^2``,
    optionally with Monte Carlo estimates (``mc_params`` is a ``SimConfig``)."""
    s0 = mdp.initial if s0 is None else s0
    strategy.validate(mdp)
    st = exact_stats(mdp, strategy, s0)
    report = RelationReport(st.mean_payoff, st.global_variance, st.local_variance, st.hybrid_variance, st.mean_square)
    if mc_params is not None:
        from .sim import simulate

        report.simulated = simulate(mdp, strategy, s0, mc_params)
    return report
