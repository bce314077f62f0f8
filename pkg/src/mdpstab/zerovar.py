"""Least expected mean payoff achievable with zero variance, for each variance notion."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .global_var import mec_submdp, sigma_zc
from .graph import almost_sure_cobuchi, almost_sure_reach, mec_decomposition
from .model import Action, Mdp, StochasticUpdateStrategy, UnknownTarget, format_fraction
from .numerics.mdp_lp import (
    TargetNotAlmostSureReachable,
    cumulative_reward_strategy,
    mec_payoff_bounds,
    min_cumulative_reward_as_reach,
)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class ZeroVarAnswer:
    kind: str
    state: str
    value: Fraction | None  # None means no strategy has zero variance
    strategy: StochasticUpdateStrategy | None = field(default=None, repr=False)

    @property
    def exists(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "state": self.state,
            "value": None if self.value is None else format_fraction(self.value),
            "answer": "NO" if self.value is None else format_fraction(self.value),
            "strategy": self.strategy.to_dict() if self.strategy else None,
        }


def _check_state(mdp: Mdp, s0: str) -> None:
    if not mdp.has_state(s0):
        raise UnknownTarget("start", s0)


def _memoryless(mdp: Mdp, choice: dict) -> StochasticUpdateStrategy:
    return StochasticUpdateStrategy.memoryless(mdp, {s: choice.get(s, mdp.act(s)[0].id) for s in mdp.states})


# ---------------------------------------------------------------- hybrid


def _hybrid_levels(mdp: Mdp):
    """Yield ``(reward level, coBuchi winning set, memoryless witness)`` in increasing order."""
    for level in sorted({a.reward for a in mdp.actions}):
        allowed = [a.id for a in mdp.actions if a.reward == level]
        win, witness = almost_sure_cobuchi(mdp, allowed)
        yield level, win, witness


def zero_hybrid(mdp: Mdp, s0: str | None = None) -> ZeroVarAnswer:
    """Least reward ``b`` such that, almost surely, eventually only reward-``b`` actions occur."""
    s0 = mdp.initial if s0 is None else s0
    _check_state(mdp, s0)
    for level, win, witness in _hybrid_levels(mdp):
        if s0 in win:
            return ZeroVarAnswer("hybrid", s0, level, _memoryless(mdp, witness.choice))
    return ZeroVarAnswer("hybrid", s0, None)


def hybrid_levels_per_state(mdp: Mdp) -> tuple:
    """``(beta, witnesses)``: ``beta[s]`` is the zero-hybrid value from ``s`` (``None`` if none),
    ``witnesses[level]`` a memoryless strategy winning for that level."""
    beta: dict = {s: None for s in mdp.states}
    witnesses = {}
    for level, win, witness in _hybrid_levels(mdp):
        fresh = [s for s in win if beta[s] is None]
        if fresh:
            witnesses[level] = witness
            for s in fresh:
                beta[s] = level
    return beta, witnesses


# ---------------------------------------------------------------- local


def switch_state(s: str) -> str:
    return f"{s}#done"


def switch_action(s: str) -> str:
    return f"{s}#switch"


def build_switch_mdp(mdp: Mdp, beta: dict) -> tuple:
    """Zero-reward copy of ``mdp`` with, at every state with a finite level, a switch
    action of reward ``beta(s) - M`` into a fresh absorbing state.  Returns ``(mdp, M, target)``."""
    finite = [b for b in beta.values() if b is not None]
    offset = 1 + max(finite)
    states = list(mdp.states)
    actions = [Action(a.id, a.source, ZERO, a.transitions) for a in mdp.actions]
    target = []
    for s in mdp.states:
        if beta[s] is None:
            continue
        done = switch_state(s)
        states.append(done)
        target.append(done)
        actions.append(Action(switch_action(s), s, beta[s] - offset, ((done, ONE),)))
        actions.append(Action(f"{done}#loop", done, ZERO, ((done, ONE),)))
    if len(set(states)) != len(states) or len({a.id for a in actions}) != len(actions):
        raise ValueError("state or action names collide with the switch construction")
    return Mdp(states, actions, mdp.initial), offset, target


def zero_local(mdp: Mdp, s0: str | None = None) -> ZeroVarAnswer:
    """Least expected mean payoff among strategies whose runs almost surely have zero local variance.

    Such a run eventually settles in behaviour with a single reward value, so
    the strategy decides where to switch to a zero-hybrid strategy; the best
    switching policy minimises an expected total reward.
    """
    s0 = mdp.initial if s0 is None else s0
    _check_state(mdp, s0)
    beta, witnesses = hybrid_levels_per_state(mdp)
    if all(b is None for b in beta.values()):
        return ZeroVarAnswer("local", s0, None)
    switched, offset, target = build_switch_mdp(mdp, beta)
    try:
        values = min_cumulative_reward_as_reach(switched, target, s0)
    except TargetNotAlmostSureReachable:
        return ZeroVarAnswer("local", s0, None)
    plan = cumulative_reward_strategy(switched, target, values).choice

    levels = sorted({beta[s] for s in mdp.states if plan.get(s) == switch_action(s)})
    memory = ("reach",) + tuple(f"level:{format_fraction(b)}" for b in levels)
    mem_of = {b: f"level:{format_fraction(b)}" for b in levels}

    def arrive(t):
        return mem_of[beta[t]] if plan.get(t) == switch_action(t) else "reach"

    next_move = {}
    for s in mdp.states:
        a = plan.get(s)
        next_move[(s, "reach")] = {a if a is not None and a != switch_action(s) else mdp.act(s)[0].id: ONE}
        for b in levels:
            next_move[(s, mem_of[b])] = {witnesses[b].choice.get(s, mdp.act(s)[0].id): ONE}
    update = {}
    for act in mdp.actions:
        for t in act.successors:
            m = arrive(t)
            if m != "reach":
                update[(act.id, t, "reach")] = {m: ONE}
    strategy = StochasticUpdateStrategy(memory, {arrive(s0): ONE}, next_move, update)
    return ZeroVarAnswer("local", s0, values[s0] + offset, strategy)


# ---------------------------------------------------------------- global


def zero_global(mdp: Mdp, s0: str | None = None) -> ZeroVarAnswer:
    """Least ``l`` such that MECs whose payoff interval contains ``l`` are reached almost surely."""
    s0 = mdp.initial if s0 is None else s0
    _check_state(mdp, s0)
    intervals = [mec_payoff_bounds(mdp, m) for m in mec_decomposition(mdp)]
    for level in sorted({iv.alpha for iv in intervals}):
        hosts = [iv.mec for iv in intervals if iv.contains(level)]
        target = {s for m in hosts for s in m.states}
        win, reach = almost_sure_reach(mdp, target)
        if s0 not in win:
            continue
        choice = {s: {a: ONE} for s, a in reach.choice.items() if s not in target}
        for m in hosts:
            sigma = sigma_zc(mec_submdp(mdp, m), level)
            for s in m.states:
                choice[s] = dict(sigma.next_move[(s, "m")])
        return ZeroVarAnswer("global", s0, level, StochasticUpdateStrategy.memoryless(mdp, choice))
    return ZeroVarAnswer("global", s0, None)


ZERO_VARIANCE = {"global": zero_global, "local": zero_local, "hybrid": zero_hybrid}


def zero_variance_table(mdp: Mdp, kind: str) -> list:
    solve = ZERO_VARIANCE[kind]
    return [solve(mdp, s) for s in mdp.states]
