"""Global variance: the variance of the mean payoff across runs.

A strategy is summarised by how much probability ends in each MEC (``Y_C``)
and by the value ``x_C`` of the mean payoff there.  For a fixed vector of
MEC values the achievable ``(E[mp], Var[mp])`` points come from a linear
flow system, with ``Var = sum x_C**2 Y_C - (sum x_C Y_C)**2``.  The MEC
values are restricted to the clamp shape ``clamp(z, alpha_C, beta_C)`` for
``z`` on a grid of multiples of ``tau = eps / (8 max(N, 1))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .graph import Mec, almost_sure_reach, bsccs, mec_decomposition
from .model import Mdp, ModelError, StochasticUpdateStrategy, induce_chain
from .numerics.chains import stationary_distribution
from .numerics.hull import best_on_chain, lower_chain, multiples, sweep_search, variance_score
from .numerics.lp import LE
from .numerics.mdp_lp import build_flow_system, mec_payoff_bounds, y_var, ys_var
from .results import NO, YES, CheckResult, InfeasibleSolution, check_eps

ZERO = Fraction(0)
ONE = Fraction(1)


class ZOutsideInterval(ModelError):
    def __init__(self, z, alpha, beta):
        super().__init__(f"z = {z} lies outside the payoff interval [{alpha}, {beta}]")
        self.z, self.alpha, self.beta = z, alpha, beta


def tau_for(mdp: Mdp, eps) -> Fraction:
    return Fraction(eps) / (8 * max(mdp.reward_bound, ONE))


def z_grid(mdp: Mdp, tau) -> list:
    return multiples(mdp.min_reward, mdp.max_reward, tau)


def mec_submdp(mdp: Mdp, mec: Mec) -> Mdp:
    """The MEC as a strongly connected MDP of its own (no maximality check)."""
    initial = mdp.initial if mdp.initial in mec.states else min(mec.states)
    return Mdp(mec.states, [mdp.action(a) for a in mec.actions], initial)


# ---------------------------------------------------------------- sigma_{z_C}


def _action_frequencies(mdp: Mdp, strategy: StochasticUpdateStrategy) -> dict:
    chain = induce_chain(mdp, strategy)
    (only,) = bsccs(chain)
    freq = {a: ZERO for a in mdp.action_ids}
    for loc, w in stationary_distribution(chain, only).items():
        freq[loc[2]] += w
    return freq


def _closed_components(mdp: Mdp, support: dict) -> list:
    """Closed strongly connected pieces of the graph of positive-frequency actions."""
    return mec_decomposition(mdp, [a for a, f in support.items() if f > 0])


@lru_cache(maxsize=4096)
def sigma_zc(mec_mdp: Mdp, z) -> StochasticUpdateStrategy:
    """Memoryless strategy on a strongly connected MDP under which almost every run has mean payoff ``z``.

    The frequencies of the uniform strategy are mixed with those of the
    extreme (minimum or maximum payoff) frequency function; playing each
    action with probability proportional to the mixed frequency realises the
    mix in every run.
    """
    z = Fraction(z)
    mecs = mec_decomposition(mec_mdp)
    if len(mecs) != 1 or mecs[0].states != frozenset(mec_mdp.states):
        raise ModelError("sigma_zc needs a strongly connected MDP")
    whole = mecs[0]
    bounds = mec_payoff_bounds(mec_mdp, whole)
    if not bounds.contains(z):
        raise ZOutsideInterval(z, bounds.alpha, bounds.beta)
    uniform = StochasticUpdateStrategy.memoryless(
        mec_mdp, {s: {a.id: Fraction(1, len(mec_mdp.act(s))) for a in mec_mdp.act(s)} for s in mec_mdp.states}
    )
    base = _action_frequencies(mec_mdp, uniform)
    zb = sum((f * mec_mdp.action(a).reward for a, f in base.items()), ZERO)
    if z == zb:
        freq = base
    else:
        ext, zx = (bounds.beta_frequencies, bounds.beta) if z > zb else (bounds.alpha_frequencies, bounds.alpha)
        p = (zx - z) / (zx - zb)
        freq = {a: p * base[a] + (1 - p) * ext.get(a, ZERO) for a in mec_mdp.action_ids}

    choice = {}
    covered = {s for s in mec_mdp.states if any(freq[a.id] > 0 for a in mec_mdp.act(s))}
    if covered != set(mec_mdp.states):
        # only at an interval end: keep one closed piece of the support and steer into it
        pieces = _closed_components(mec_mdp, freq)
        piece = next(
            c
            for c in pieces
            if sum((freq[a] * mec_mdp.action(a).reward for a in c.actions), ZERO)
            == z * sum((freq[a] for a in c.actions), ZERO)
        )
        freq = {a: (freq[a] if a in piece.actions else ZERO) for a in mec_mdp.action_ids}
        _, reach = almost_sure_reach(mec_mdp, piece.states)
        for s in mec_mdp.states:
            if s not in piece.states:
                choice[s] = {reach.choice[s]: ONE}
    for s in mec_mdp.states:
        if s in choice:
            continue
        total = sum((freq[a.id] for a in mec_mdp.act(s)), ZERO)
        choice[s] = {a.id: freq[a.id] / total for a in mec_mdp.act(s) if freq[a.id] > 0}
    return StochasticUpdateStrategy.memoryless(mec_mdp, choice)


# ---------------------------------------------------------------- system L with fixed MEC values


@dataclass
class SystemLz:
    """Flow system with every ``x_C`` fixed; ``mean_row`` and ``square_row`` give
    ``sum x_C Y_C`` and ``sum x_C**2 Y_C`` as linear forms in the ``y_t``."""

    flow: object
    mec_values: dict
    mean_row: dict
    square_row: dict

    @property
    def lp(self):
        return self.flow.lp


def _rows(mecs, values: dict):
    mean, square = {}, {}
    for m in mecs:
        c = values[m]
        for t in m.states:
            if c:
                mean[ys_var(t)] = c
                square[ys_var(t)] = c * c
    return mean, square


def clamp_vector(intervals: list, z) -> tuple:
    return tuple(iv.clamp(z) for iv in intervals)


def build_system_Lz(mdp: Mdp, s0: str, u, v, z) -> SystemLz:
    """System L with ``x_C = clamp(z, alpha_C, beta_C)``; the mean bound ``u`` is a
    linear row, the variance bound ``v`` is left to the caller (it is quadratic)."""
    flow = build_flow_system(mdp, s0, recurrent=False)
    intervals = [mec_payoff_bounds(mdp, m) for m in flow.mecs]
    values = dict(zip(flow.mecs, clamp_vector(intervals, z)))
    mean, square = _rows(flow.mecs, values)
    flow.lp.add_constraint(mean, LE, Fraction(u))
    return SystemLz(flow, values, mean, square)


# ---------------------------------------------------------------- synthesis


def mec_masses(mecs: list, assignment: dict) -> dict:
    return {m: sum((assignment.get(ys_var(t), ZERO) for t in m.states), ZERO) for m in mecs}


def _check_flow(mdp: Mdp, s0: str, assignment: dict, recurrent: bool) -> None:
    flow = build_flow_system(mdp, s0, recurrent=recurrent)
    full = {v: assignment.get(v, ZERO) for v in flow.lp.variables}
    if not flow.lp.satisfied_by(full):
        raise InfeasibleSolution("assignment violates the flow equations")


def two_phase_strategy(mdp: Mdp, s0: str, transient: dict, recurrent_move: dict) -> StochasticUpdateStrategy:
    """Memory ``m1`` follows the transient flow and switches to ``m2`` in state ``t``
    with probability ``y_t / (y_t + sum_a y_a)``; ``m2`` plays ``recurrent_move``.

    ``transient`` holds the ``y`` values (keys from ``y_var`` / ``ys_var``).
    """
    def out(s):
        return sum((transient.get(y_var(a.id), ZERO) for a in mdp.act(s)), ZERO)

    def switch(s):
        ys = transient.get(ys_var(s), ZERO)
        if not ys:
            return ZERO
        return ys / (ys + out(s))

    next_move = {}
    for s in mdp.states:
        total = out(s)
        if total > 0:
            next_move[(s, "m1")] = {a.id: transient.get(y_var(a.id), ZERO) / total for a in mdp.act(s) if transient.get(y_var(a.id), ZERO) > 0}
        else:
            next_move[(s, "m1")] = recurrent_move.get(s) or {mdp.act(s)[0].id: ONE}
        next_move[(s, "m2")] = recurrent_move.get(s) or {mdp.act(s)[0].id: ONE}
    update = {}
    for act in mdp.actions:
        for t in act.successors:
            p = switch(t)
            if p == 1:
                update[(act.id, t, "m1")] = {"m2": ONE}
            elif p > 0:
                update[(act.id, t, "m1")] = {"m1": 1 - p, "m2": p}
    p0 = switch(s0)
    init = {"m2": ONE} if p0 == 1 else ({"m1": ONE} if p0 == 0 else {"m1": 1 - p0, "m2": p0})
    return StochasticUpdateStrategy(("m1", "m2"), init, next_move, update)


def synthesize_global(mdp: Mdp, s0: str, assignment: dict, mec_values: dict) -> StochasticUpdateStrategy:
    """2-memory strategy from a solution of system L: transient play proportional to
    ``y_a``, then ``sigma_{x_C}`` inside the MEC where the run switched."""
    _check_flow(mdp, s0, assignment, recurrent=False)
    move = {}
    for mec, c in mec_values.items():
        sub = mec_submdp(mdp, mec)
        try:
            sigma = sigma_zc(sub, Fraction(c))
        except ZOutsideInterval as exc:
            raise InfeasibleSolution(str(exc)) from None
        for s in mec.states:
            move[s] = dict(sigma.next_move[(s, "m")])
    return two_phase_strategy(mdp, s0, assignment, move)


# ---------------------------------------------------------------- checking


@dataclass
class GlobalWitness:
    z_bar: Fraction
    mec_values: dict
    assignment: dict
    expectation: Fraction
    variance: Fraction
    strategy: StochasticUpdateStrategy = field(default=None, repr=False)

    def to_dict(self) -> dict:
        from .model import format_fraction as ff

        return {
            "z_bar": ff(self.z_bar),
            "mec_values": {m.label(): ff(c) for m, c in sorted(self.mec_values.items())},
            "expectation": ff(self.expectation),
            "variance": ff(self.variance),
            "strategy": self.strategy.to_dict() if self.strategy else None,
        }


class GlobalChecker:
    """Answers repeated global-variance queries for one ``(mdp, s0, eps)``.

    Each distinct clamped MEC-value vector is solved once into the lower
    boundary of its ``(sum x_C Y_C, sum x_C**2 Y_C)`` projection; a query is
    then an exact scan of that boundary.
    """

    def __init__(self, mdp: Mdp, s0: str | None = None, eps=Fraction(1, 100), method: str = "hull"):
        self.mdp = mdp
        self.s0 = mdp.initial if s0 is None else s0
        if not mdp.has_state(self.s0):
            from .model import UnknownTarget

            raise UnknownTarget("start", self.s0)
        self.eps = check_eps(eps)
        if method not in ("hull", "sweep"):
            raise ValueError(f"unknown method {method!r}")
        self.method = method
        self.tau = tau_for(mdp, self.eps)
        self.flow = build_flow_system(mdp, self.s0, recurrent=False)
        self.intervals = [mec_payoff_bounds(mdp, m) for m in self.flow.mecs]
        self.vectors = []  # (z_bar, values) with the first z_bar for each distinct vector
        seen = set()
        for z in z_grid(mdp, self.tau):
            vec = clamp_vector(self.intervals, z)
            if vec not in seen:
                seen.add(vec)
                self.vectors.append((z, vec))
        self._chains: dict = {}

    def _chain(self, vec):
        if vec not in self._chains:
            mean, square = _rows(self.flow.mecs, dict(zip(self.flow.mecs, vec)))
            self._chains[vec] = lower_chain(self.flow.lp, mean, square)
        return self._chains[vec]

    def prepare(self) -> None:
        for _, vec in self.vectors:
            self._chain(vec)

    def _search(self, vec, u, v):
        mean, square = _rows(self.flow.mecs, dict(zip(self.flow.mecs, vec)))
        if self.method == "sweep":
            return sweep_search(self.flow.lp, mean, square, u, v, self.tau, self.mdp.min_reward, self.mdp.max_reward)
        best = best_on_chain(self._chain(vec), u, variance_score)
        if best is None or best[0] > v:
            return None
        return best[1].assignment

    def check(self, u, v, synthesize: bool = True) -> CheckResult:
        u, v = Fraction(u), Fraction(v)
        for z, vec in self.vectors:
            asg = self._search(vec, u, v)
            if asg is None:
                continue
            values = dict(zip(self.flow.mecs, vec))
            masses = mec_masses(self.flow.mecs, asg)
            e = sum((values[m] * masses[m] for m in self.flow.mecs), ZERO)
            var = sum((values[m] ** 2 * masses[m] for m in self.flow.mecs), ZERO) - e * e
            witness = GlobalWitness(z, values, asg, e, var)
            if synthesize:
                witness.strategy = synthesize_global(self.mdp, self.s0, asg, values)
            return CheckResult("global", YES, u, v, witness)
        return CheckResult("global", NO, u, v)


def approx_check_global(mdp: Mdp, s0: str, u, v, eps, method: str = "hull") -> CheckResult:
    """Yes when some strategy achieves ``(E[mp], Var[mp]) <= (u, v)`` with MEC values
    on the ``tau`` grid; such strategies exist whenever ``(u - eps, v - eps)`` is
    achievable at all, and none exist when the answer is No."""
    return GlobalChecker(mdp, s0, eps, method).check(u, v)
