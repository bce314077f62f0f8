"""Flow-based linear programs over MDPs: frequency functions, payoff bounds,
transient flow systems and minimal cumulative reward."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from ..graph import Mec, almost_sure_reach, mec_decomposition, attractor
from ..model import Mdp, ModelError, MemorylessDeterministicStrategy
from .lp import EQ, GE, LinearProgram, Status, solve_lp

ZERO = Fraction(0)
ONE = Fraction(1)


def y_var(action: str) -> str:
    return f"y[{action}]"


def ys_var(state: str) -> str:
    return f"ys[{state}]"


def x_var(action: str) -> str:
    return f"x[{action}]"


class TargetNotAlmostSureReachable(ModelError):
    def __init__(self, state):
        super().__init__(f"target cannot be reached almost surely from {state!r}")
        self.state = state


# ---------------------------------------------------------------- frequency functions


def frequency_lp(mdp: Mdp, actions: Iterable[str]) -> LinearProgram:
    """Flow-balanced distributions over ``actions`` (``x_a >= 0``, ``sum x_a = 1``)."""
    actions = sorted(actions)
    lp = LinearProgram()
    for a in actions:
        lp.add_variable(x_var(a))
    states = sorted({mdp.action(a).source for a in actions})
    inflow: dict = {s: {} for s in states}
    for a in actions:
        for t, p in mdp.action(a).transitions:
            if t in inflow:
                inflow[t][x_var(a)] = inflow[t].get(x_var(a), ZERO) + p
    for s in states:
        row = dict(inflow[s])
        for a in mdp.act(s):
            if a.id in actions:
                row[x_var(a.id)] = row.get(x_var(a.id), ZERO) - 1
        lp.add_constraint(row, EQ, 0)
    lp.add_constraint({x_var(a): 1 for a in actions}, EQ, 1)
    return lp


@dataclass(frozen=True)
class PayoffInterval:
    """``[alpha, beta]``: the least and greatest mean payoff achievable inside a MEC."""

    mec: Mec
    alpha: Fraction
    beta: Fraction
    alpha_frequencies: dict = field(default_factory=dict, compare=False, hash=False)
    beta_frequencies: dict = field(default_factory=dict, compare=False, hash=False)

    def contains(self, z) -> bool:
        return self.alpha <= z <= self.beta

    def clamp(self, z) -> Fraction:
        return min(max(Fraction(z), self.alpha), self.beta)


def _frequencies(assignment: dict, actions) -> dict:
    return {a: assignment[x_var(a)] for a in sorted(actions)}


@lru_cache(maxsize=4096)
def mec_payoff_bounds(mdp: Mdp, mec: Mec) -> PayoffInterval:
    lp = frequency_lp(mdp, mec.actions)
    reward = {x_var(a): mdp.action(a).reward for a in mec.actions}
    lo = lp.copy()
    lo.set_objective("min", reward)
    hi = lp.copy()
    hi.set_objective("max", reward)
    rlo, rhi = solve_lp(lo), solve_lp(hi)
    if rlo.status != Status.OPTIMAL or rhi.status != Status.OPTIMAL:  # pragma: no cover - MECs always admit a frequency
        raise RuntimeError(f"no frequency function on {mec.label()}")
    return PayoffInterval(
        mec,
        rlo.objective_value,
        rhi.objective_value,
        _frequencies(rlo.assignment, mec.actions),
        _frequencies(rhi.assignment, mec.actions),
    )


def payoff_intervals(mdp: Mdp) -> list:
    return [mec_payoff_bounds(mdp, m) for m in mec_decomposition(mdp)]


# ---------------------------------------------------------------- transient flow systems


@dataclass
class FlowSystem:
    """The linear part shared by the global and hybrid systems.

    ``y_a`` is the expected number of times action ``a`` is used before the
    run switches to recurrent behaviour, ``y_s`` the probability of switching
    in state ``s`` (MEC states only).  With ``recurrent`` set, ``x_a`` are the
    long-run frequencies of MEC actions, coupled per MEC to the switching mass.
    """

    mdp: Mdp
    start: str
    mecs: list
    lp: LinearProgram
    recurrent: bool

    def mec_mass_row(self, mec: Mec) -> dict:
        return {ys_var(t): ONE for t in mec.states}


def build_flow_system(mdp: Mdp, start: str, recurrent: bool = True, recurrent_actions=None) -> FlowSystem:
    """Transient flow equations, normalisation, and (optionally) the recurrent x-flow.

    ``recurrent_actions`` restricts which MEC actions may carry ``x`` mass.
    """
    mecs = mec_decomposition(mdp)
    in_mec = {s for m in mecs for s in m.states}
    lp = LinearProgram()
    for a in mdp.action_ids:
        lp.add_variable(y_var(a))
    for s in mdp.states:
        if s in in_mec:
            lp.add_variable(ys_var(s))
    inflow: dict = {s: {} for s in mdp.states}
    for act in mdp.actions:
        for t, p in act.transitions:
            inflow[t][y_var(act.id)] = inflow[t].get(y_var(act.id), ZERO) + p
    for s in mdp.states:
        row = {v: -c for v, c in inflow[s].items()}
        for a in mdp.act(s):
            row[y_var(a.id)] = row.get(y_var(a.id), ZERO) + 1
        if s in in_mec:
            row[ys_var(s)] = ONE
        lp.add_constraint(row, EQ, 1 if s == start else 0)
    lp.add_constraint({ys_var(s): 1 for s in sorted(in_mec)}, EQ, 1)

    if recurrent:
        allowed = None if recurrent_actions is None else set(recurrent_actions)
        xs = {}
        for m in mecs:
            for a in sorted(m.actions):
                if allowed is None or a in allowed:
                    xs[a] = lp.add_variable(x_var(a))
        for m in mecs:
            row = {ys_var(s): ONE for s in m.states}
            for a in m.actions:
                if a in xs:
                    row[x_var(a)] = -ONE
            lp.add_constraint(row, EQ, 0)
            for s in sorted(m.states):
                row = {}
                for a in m.actions:
                    if a in xs:
                        p = mdp.action(a).dist.get(s)
                        if p:
                            row[x_var(a)] = row.get(x_var(a), ZERO) + p
                for a in mdp.act(s):
                    if a.id in xs:
                        row[x_var(a.id)] = row.get(x_var(a.id), ZERO) - 1
                if row:
                    lp.add_constraint(row, EQ, 0)
    return FlowSystem(mdp, start, mecs, lp, recurrent)


# ---------------------------------------------------------------- cumulative reward


def min_cumulative_reward_as_reach(mdp: Mdp, target: Iterable[str], start: str | None = None) -> dict:
    """Least expected total reward over strategies that reach ``target`` almost surely.

    Rewards outside ``target`` must be non-positive, so the problem is a
    positive (maximal total cost) model for the cost ``-r``.  It is solved on
    the almost-sure winning region by the LP ``min sum w`` subject to
    ``w(s) >= -r(a) + sum_t delta(a)(t) w(t)`` for actions that stay in the
    region.  Returns the value for every winning state.
    """
    target = set(target)
    win, _ = almost_sure_reach(mdp, target)
    if start is not None and start not in win:
        raise TargetNotAlmostSureReachable(start)
    if any(mdp.action(a).reward > 0 for s in win - target for a in (b.id for b in mdp.act(s))):
        raise ValueError("rewards outside the target must be non-positive")
    inner = sorted(win - target)
    lp = LinearProgram()
    w = {s: lp.add_variable(f"w[{s}]") for s in inner}
    for s in inner:
        for a in mdp.act(s):
            if not set(a.successors) <= win:
                continue
            row = {w[s]: ONE}
            for t, p in a.transitions:
                if t in w:
                    row[w[t]] = row.get(w[t], ZERO) - p
            lp.add_constraint(row, GE, -a.reward)
    lp.set_objective("min", {w[s]: 1 for s in inner})
    out = solve_lp(lp)
    if out.status != Status.OPTIMAL:
        raise ValueError("cumulative reward is unbounded")
    values = {s: ZERO for s in win & target}
    for s in inner:
        values[s] = -out.assignment[w[s]]
    return values


def cumulative_reward_strategy(mdp: Mdp, target: Iterable[str], values: dict) -> MemorylessDeterministicStrategy:
    """Memoryless optimal strategy: reach ``target`` using only value-preserving actions."""
    target = set(target)
    win = set(values)
    tight = set()
    for s in win - target:
        for a in mdp.act(s):
            if set(a.successors) <= win and values[s] == a.reward + sum(
                (p * values[t] for t, p in a.transitions), ZERO
            ):
                tight.add(a.id)
    reach, _, choice, _ = attractor(mdp, target, tight)
    missing = (win - target) - set(choice)
    if missing:  # pragma: no cover - excluded by the LP minimality argument
        raise RuntimeError(f"tight actions do not reach the target from {sorted(missing)}")
    return MemorylessDeterministicStrategy({s: choice[s] for s in sorted(win - target)})
