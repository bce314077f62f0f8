"""Local variance: squared deviation of step rewards from the run's own mean payoff.

Optimal strategies first behave in a randomised way, then commit forever to
one of two memoryless deterministic strategies.  For a guessed pair
``(pi, pi_alt)`` the commitment is modelled by a product MDP whose frozen
copies carry, as a two-dimensional reward, the expected mean payoff and
local variance of the committed strategy.  Achievability then becomes a
two-dimensional mean-payoff question, answered with the same flow system as
the hybrid case.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .model import (
    Action,
    Mdp,
    MemorylessDeterministicStrategy,
    StochasticUpdateStrategy,
    UnknownTarget,
    count_md_strategies,
    enumerate_md_strategies,
    format_fraction,
    induce_chain,
)
from .numerics.chains import chain_long_run_stats
from .numerics.hull import best_on_chain, lower_chain
from .numerics.mdp_lp import FlowSystem, build_flow_system, x_var, y_var
from .results import BUDGET_EXCEEDED, NO, YES, CheckResult, InfeasibleSolution

ZERO = Fraction(0)
ONE = Fraction(1)
DEFAULT_PAIR_BUDGET = 10_000

MAIN, FIRST, SECOND = "m1", "m2", "m2'"
START = "@in"
COMMIT_FIRST, COMMIT_SECOND, DEFAULT = "[pi]", "[pi']", "default"


class InfeasibleWitness(InfeasibleSolution):
    pass


@lru_cache(maxsize=1024)
def md_local_stats(mdp: Mdp, pi: MemorylessDeterministicStrategy) -> dict:
    """``state -> (E[mp], E[lv])`` of the chain induced by ``pi``."""
    pi.validate(mdp)
    strategy = StochasticUpdateStrategy.from_md(mdp, pi)
    out = {}
    for s in mdp.states:
        st = chain_long_run_stats(induce_chain(mdp, strategy, s))
        out[s] = (st.mean_payoff, st.local_variance)
    return out


def copy_state(s: str, mem: str) -> str:
    return f"{s}@{mem}"


@dataclass
class ProductMdp:
    """The product with memory ``{m1, m2, m2'}`` plus a fresh initial state.

    ``state_reward`` maps every product state to its two-dimensional reward;
    ``origin`` maps product action ids back to ``(kind, base state, base action)``.
    """

    base: Mdp
    pi: MemorylessDeterministicStrategy
    pi_alt: MemorylessDeterministicStrategy
    mdp: Mdp
    state_reward: dict
    origin: dict

    def frozen_actions(self) -> list:
        return [a for a, (kind, _, _) in self.origin.items() if kind in (FIRST, SECOND)]


def build_product(mdp: Mdp, pi: MemorylessDeterministicStrategy, pi_alt: MemorylessDeterministicStrategy) -> ProductMdp:
    stats = md_local_stats(mdp, pi)
    stats_alt = md_local_stats(mdp, pi_alt)
    hi, lo = mdp.max_reward, mdp.min_reward
    penalty = (hi + 1, (hi - lo) ** 2 + 1)
    states = [START]
    reward = {START: penalty}
    actions = []
    origin = {}

    def add(ident, source, succ, kind, base_state, base_action):
        actions.append(Action(ident, source, reward[source][0], tuple(sorted(succ.items()))))
        origin[ident] = (kind, base_state, base_action)

    for s in mdp.states:
        for mem in (MAIN, FIRST, SECOND):
            states.append(copy_state(s, mem))
        reward[copy_state(s, MAIN)] = penalty
        reward[copy_state(s, FIRST)] = stats[s]
        reward[copy_state(s, SECOND)] = stats_alt[s]
    s0 = mdp.initial
    add(f"{DEFAULT}{START}", START, {copy_state(s0, MAIN): ONE}, START, s0, None)
    add(f"{COMMIT_FIRST}{START}", START, {copy_state(s0, FIRST): ONE}, START, s0, COMMIT_FIRST)
    add(f"{COMMIT_SECOND}{START}", START, {copy_state(s0, SECOND): ONE}, START, s0, COMMIT_SECOND)
    for s in mdp.states:
        main = copy_state(s, MAIN)
        for a in mdp.act(s):
            add(f"{a.id}@{MAIN}", main, {copy_state(t, MAIN): p for t, p in a.transitions}, MAIN, s, a.id)
        add(f"{COMMIT_FIRST}@{s}", main, {copy_state(s, FIRST): ONE}, MAIN, s, COMMIT_FIRST)
        add(f"{COMMIT_SECOND}@{s}", main, {copy_state(s, SECOND): ONE}, MAIN, s, COMMIT_SECOND)
        for mem in (FIRST, SECOND):
            st = copy_state(s, mem)
            add(f"{DEFAULT}@{st}", st, {st: ONE}, mem, s, None)
    if len(origin) != len(actions):
        raise ValueError("product action names collide; rename base actions containing '@'")
    return ProductMdp(mdp, pi, pi_alt, Mdp(states, actions, START), reward, origin)


@dataclass
class PairSystem:
    product: ProductMdp
    flow: FlowSystem
    mean_row: dict
    lv_row: dict


def build_pair_system(product: ProductMdp, frozen_only: bool = True) -> PairSystem:
    """Flow system on the product with objective forms ``sum x r_1`` and ``sum x r_2``.

    With ``frozen_only`` the recurrent frequencies live on the frozen copies
    only, which is where optimal strategies end up anyway.
    """
    pm = product.mdp
    allowed = product.frozen_actions() if frozen_only else None
    flow = build_flow_system(pm, START, recurrent=True, recurrent_actions=allowed)
    present = set(flow.lp.variables)
    mean, lv = {}, {}
    for a in pm.actions:
        v = x_var(a.id)
        if v in present:
            r1, r2 = product.state_reward[a.source]
            if r1:
                mean[v] = r1
            if r2:
                lv[v] = r2
    return PairSystem(product, flow, mean, lv)


# ---------------------------------------------------------------- synthesis


@dataclass
class LocalWitness:
    pi: MemorylessDeterministicStrategy
    pi_alt: MemorylessDeterministicStrategy
    rho: dict  # product state -> distribution over product actions
    expectation: Fraction
    local_variance: Fraction
    product: ProductMdp = field(default=None, repr=False)
    strategy: StochasticUpdateStrategy = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "pi": dict(self.pi.choice),
            "pi_alt": dict(self.pi_alt.choice),
            "expectation": format_fraction(self.expectation),
            "local_variance": format_fraction(self.local_variance),
            "strategy": self.strategy.to_dict() if self.strategy else None,
        }


def product_strategy(product: ProductMdp, assignment: dict) -> dict:
    """Memoryless product strategy playing each action in proportion to its transient flow."""
    pm = product.mdp
    rho = {}
    for s in pm.states:
        flows = {a.id: assignment.get(y_var(a.id), ZERO) for a in pm.act(s)}
        total = sum(flows.values(), ZERO)
        if total > 0:
            rho[s] = {a: f / total for a, f in flows.items() if f > 0}
    return rho


def synthesize_local(witness: LocalWitness) -> StochasticUpdateStrategy:
    """3-memory strategy: ``m1`` mimics ``rho`` on the main copy, the commitment
    actions become memory updates to ``m2`` (play ``pi``) or ``m2'`` (play ``pi_alt``)."""
    product = witness.product
    if product is None:
        raise InfeasibleWitness("witness lacks its product MDP")
    mdp = product.base
    rho = witness.rho

    def split(s):
        """(distribution over base actions, P(commit pi), P(commit pi_alt)) at main copy of s."""
        d = rho.get(copy_state(s, MAIN))
        if not d:
            return None, ZERO, ZERO
        base = {product.origin[a][2]: p for a, p in d.items() if product.origin[a][2] not in (COMMIT_FIRST, COMMIT_SECOND)}
        c1 = d.get(f"{COMMIT_FIRST}@{s}", ZERO)
        c2 = d.get(f"{COMMIT_SECOND}@{s}", ZERO)
        return base, c1, c2

    next_move = {}
    update = {}
    for s in mdp.states:
        base, c1, c2 = split(s)
        stay = 1 - c1 - c2
        if base and stay > 0:
            next_move[(s, MAIN)] = {a: p / stay for a, p in base.items()}
        else:
            next_move[(s, MAIN)] = {mdp.act(s)[0].id: ONE}
        next_move[(s, FIRST)] = {witness.pi.choice[s]: ONE}
        next_move[(s, SECOND)] = {witness.pi_alt.choice[s]: ONE}
        if c1 or c2:
            dist = {m: p for m, p in ((MAIN, stay), (FIRST, c1), (SECOND, c2)) if p}
            for a in mdp.actions:
                if s in a.successors:
                    update[(a.id, s, MAIN)] = dist

    d_in = rho.get(START)
    if not d_in:
        raise InfeasibleWitness("product strategy undefined at the initial state")
    p_main = d_in.get(f"{DEFAULT}{START}", ZERO)
    _, c1, c2 = split(mdp.initial)
    init = {
        MAIN: p_main * (1 - c1 - c2),
        FIRST: d_in.get(f"{COMMIT_FIRST}{START}", ZERO) + p_main * c1,
        SECOND: d_in.get(f"{COMMIT_SECOND}{START}", ZERO) + p_main * c2,
    }
    init = {m: p for m, p in init.items() if p}
    return StochasticUpdateStrategy((MAIN, FIRST, SECOND), init, next_move, update).validate(mdp)


# ---------------------------------------------------------------- checking


def md_pairs(mdp: Mdp):
    """Unordered pairs ``(pi, pi_alt)`` with ``pi`` not after ``pi_alt``, in canonical order."""
    return itertools.combinations_with_replacement(enumerate_md_strategies(mdp), 2)


def count_md_pairs(mdp: Mdp) -> int:
    n = count_md_strategies(mdp)
    return n * (n + 1) // 2


class LocalChecker:
    """Repeated local-variance queries from one start state.

    The lower boundary of the ``(E[mp], E[lv])`` region is computed once per
    strategy pair; a query scans the pairs in canonical order and reports the
    first one whose region meets ``{m <= u, q <= v}``.
    """

    def __init__(self, mdp: Mdp, s0: str | None = None, md_pair_budget: int | None = DEFAULT_PAIR_BUDGET):
        s0 = mdp.initial if s0 is None else s0
        if not mdp.has_state(s0):
            raise UnknownTarget("start", s0)
        self.mdp = mdp.with_initial(s0)
        self.s0 = s0
        self.budget = md_pair_budget
        self.total_pairs = count_md_pairs(mdp)
        self._pairs = None
        self._chains: dict = {}

    @property
    def pairs(self) -> list:
        if self._pairs is None:
            it = md_pairs(self.mdp)
            self._pairs = list(it if self.budget is None else itertools.islice(it, self.budget))
        return self._pairs

    def _system(self, i):
        if i not in self._chains:
            pi, pi_alt = self.pairs[i]
            system = build_pair_system(build_product(self.mdp, pi, pi_alt))
            self._chains[i] = (system, lower_chain(system.flow.lp, system.mean_row, system.lv_row))
        return self._chains[i]

    def prepare(self) -> None:
        for i in range(len(self.pairs)):
            self._system(i)

    def check(self, u, v, synthesize: bool = True) -> CheckResult:
        u, v = Fraction(u), Fraction(v)
        for i in range(len(self.pairs)):
            system, chain = self._system(i)
            best = best_on_chain(chain, u)
            if best is None or best[0] > v:
                continue
            point = best[1]
            product = system.product
            rho = product_strategy(product, point.assignment)
            witness = LocalWitness(product.pi, product.pi_alt, rho, point.m, point.q, product)
            if synthesize:
                witness.strategy = synthesize_local(witness)
            return CheckResult("local", YES, u, v, witness)
        if len(self.pairs) < self.total_pairs:
            return CheckResult("local", BUDGET_EXCEEDED, u, v)
        return CheckResult("local", NO, u, v)


def check_local(mdp: Mdp, s0: str, u, v, md_pair_budget: int | None = DEFAULT_PAIR_BUDGET) -> CheckResult:
    return LocalChecker(mdp, s0, md_pair_budget).check(u, v)
