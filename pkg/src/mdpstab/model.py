"""MDP, strategy and induced Markov chain data model.

All probabilities and rewards are exact :class:`fractions.Fraction` values.
States and actions are identified by strings and kept in lexicographic order
so that every derived artifact is reproducible.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

State = str
ActionId = str
Memory = str
Location = tuple  # (state, memory, action id)

ONE = Fraction(1)
ZERO = Fraction(0)


class ModelError(ValueError):
    """Base class for malformed models and strategies."""


class EmptyActSet(ModelError):
    def __init__(self, state):
        super().__init__(f"state {state!r} has no enabled action")
        self.state = state


class BadDistribution(ModelError):
    def __init__(self, owner, total):
        super().__init__(f"distribution of {owner!r} sums to {total}, expected 1")
        self.owner = owner
        self.total = total


class UnknownTarget(ModelError):
    def __init__(self, owner, target):
        super().__init__(f"{owner!r} refers to unknown state {target!r}")
        self.owner = owner
        self.target = target


class DuplicateId(ModelError):
    def __init__(self, ident):
        super().__init__(f"duplicate identifier {ident!r}")
        self.ident = ident


class NotAMec(ModelError):
    pass


class InvalidStrategy(ModelError):
    pass


def to_fraction(value) -> Fraction:
    """Parse an int, Fraction, ``"p/q"`` or decimal string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ModelError(f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # repr round-trips, so "0.1" stays 1/10 rather than the binary expansion
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"not a rational number: {value!r}") from exc
    # gmpy2.mpq and friends
    try:
        return Fraction(int(value.numerator), int(value.denominator))
    except AttributeError:
        raise ModelError(f"not a rational number: {value!r}") from None


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Action:
    id: ActionId
    source: State
    reward: Fraction
    transitions: tuple  # sorted ((target, probability), ...)

    @property
    def dist(self) -> dict:
        return dict(self.transitions)

    @property
    def successors(self) -> tuple:
        return tuple(t for t, _ in self.transitions)


class Mdp:
    """A finite MDP ``(S, A, Act, delta)`` with a reward per action.

    Instances are immutable after construction; use :func:`validate_mdp` to
    build one from a parsed description.
    """

    __slots__ = ("states", "actions", "initial", "_by_id", "_act", "_state_set")

    def __init__(self, states: Iterable[State], actions: Iterable[Action], initial: State):
        states = tuple(sorted(states))
        actions = tuple(sorted(actions, key=lambda a: a.id))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "_state_set", frozenset(states))
        object.__setattr__(self, "_by_id", {a.id: a for a in actions})
        act = {s: [] for s in states}
        for a in actions:
            act.setdefault(a.source, []).append(a)
        object.__setattr__(self, "_act", {s: tuple(v) for s, v in act.items()})

    def __setattr__(self, name, value):
        raise AttributeError("Mdp is immutable")

    def __eq__(self, other):
        if not isinstance(other, Mdp):
            return NotImplemented
        return (self.states, self.actions, self.initial) == (other.states, other.actions, other.initial)

    def __hash__(self):
        return hash((self.states, self.actions, self.initial))

    def __repr__(self):
        return f"Mdp(states={len(self.states)}, actions={len(self.actions)}, initial={self.initial!r})"

    def act(self, state: State) -> tuple:
        """Actions enabled in ``state`` (canonical order)."""
        return self._act[state]

    def action(self, ident: ActionId) -> Action:
        return self._by_id[ident]

    def has_state(self, state: State) -> bool:
        return state in self._state_set

    @property
    def action_ids(self) -> tuple:
        return tuple(a.id for a in self.actions)

    @property
    def max_reward(self) -> Fraction:
        return max(a.reward for a in self.actions)

    @property
    def min_reward(self) -> Fraction:
        return min(a.reward for a in self.actions)

    @property
    def reward_bound(self) -> Fraction:
        """``max |r(a)|``."""
        return max(abs(a.reward) for a in self.actions)

    def with_initial(self, state: State) -> "Mdp":
        if state not in self._state_set:
            raise UnknownTarget("initial", state)
        return Mdp(self.states, self.actions, state)

    def to_dict(self) -> dict:
        return {
            "states": list(self.states),
            "initial": self.initial,
            "actions": [
                {
                    "id": a.id,
                    "source": a.source,
                    "reward": format_fraction(a.reward),
                    "transitions": {t: format_fraction(p) for t, p in a.transitions},
                }
                for a in self.actions
            ],
        }


def validate_mdp(raw) -> Mdp:
    """Validate a parsed model description (or an existing :class:`Mdp`).

    ``raw`` follows the JSON model format::

        {"states": [...], "initial": "s1",
         "actions": [{"id": "a", "source": "s1", "reward": "0",
                      "transitions": {"s2": "1/2", "s3": "1/2"}}]}
    """
    if isinstance(raw, Mdp):
        raw = raw.to_dict()
    try:
        state_list = list(raw["states"])
        action_list = list(raw["actions"])
    except (KeyError, TypeError) as exc:
        raise ModelError(f"model description lacks {exc}") from None
    seen = set()
    for s in state_list:
        if not isinstance(s, str):
            raise ModelError(f"state identifiers must be strings, got {s!r}")
        if s in seen:
            raise DuplicateId(s)
        seen.add(s)
    if not state_list:
        raise ModelError("model has no states")
    initial = raw.get("initial", sorted(state_list)[0])
    if initial not in seen:
        raise UnknownTarget("initial", initial)

    actions = []
    ids = set()
    for entry in action_list:
        try:
            ident = entry["id"]
            source = entry["source"]
            trans = entry["transitions"]
        except (KeyError, TypeError) as exc:
            raise ModelError(f"action description lacks {exc}") from None
        if ident in ids:
            raise DuplicateId(ident)
        ids.add(ident)
        if source not in seen:
            raise UnknownTarget(ident, source)
        dist = {}
        for target, p in dict(trans).items():
            if target not in seen:
                raise UnknownTarget(ident, target)
            p = to_fraction(p)
            if p == 0:
                continue
            if p < 0 or p > 1:
                raise BadDistribution(ident, p)
            dist[target] = dist.get(target, ZERO) + p
        total = sum(dist.values(), ZERO)
        if total != 1:
            raise BadDistribution(ident, total)
        actions.append(Action(ident, source, to_fraction(entry.get("reward", 0)), tuple(sorted(dist.items()))))

    sources = {a.source for a in actions}
    for s in sorted(seen):
        if s not in sources:
            raise EmptyActSet(s)
    return Mdp(state_list, actions, initial)


# ---------------------------------------------------------------- strategies


@dataclass(frozen=True)
class MemorylessDeterministicStrategy:
    choice: Mapping[State, ActionId]

    def validate(self, mdp: Mdp) -> None:
        for s in mdp.states:
            a = self.choice.get(s)
            if a is None or a not in {b.id for b in mdp.act(s)}:
                raise InvalidStrategy(f"choice at {s!r} is not an enabled action: {a!r}")

    def key(self) -> tuple:
        return tuple(sorted(self.choice.items()))

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        if not isinstance(other, MemorylessDeterministicStrategy):
            return NotImplemented
        return self.key() == other.key()

    def label(self) -> str:
        return ",".join(f"{s}:{a}" for s, a in self.key())


def enumerate_md_strategies(mdp: Mdp) -> Iterator[MemorylessDeterministicStrategy]:
    """All memoryless deterministic strategies, in canonical (lexicographic) order."""
    choices = [[a.id for a in mdp.act(s)] for s in mdp.states]
    for combo in itertools.product(*choices):
        yield MemorylessDeterministicStrategy(dict(zip(mdp.states, combo)))


def count_md_strategies(mdp: Mdp) -> int:
    n = 1
    for s in mdp.states:
        n *= len(mdp.act(s))
    return n


def _check_dist(owner, dist: Mapping) -> dict:
    out = {}
    for k, p in dist.items():
        p = to_fraction(p)
        if p < 0:
            raise BadDistribution(owner, p)
        if p > 0:
            out[k] = p
    total = sum(out.values(), ZERO)
    if total != 1:
        raise BadDistribution(owner, total)
    return out


@dataclass(frozen=True)
class StochasticUpdateStrategy:
    """A finite-memory stochastic-update strategy ``(sigma_u, sigma_n, alpha)``.

    ``next_move[(s, m)]`` is a distribution over actions enabled in ``s``.
    ``memory_update[(a, t, m)]`` is the distribution of the new memory element
    after action ``a`` led to state ``t``; missing entries keep ``m``.
    """

    memory: tuple
    initial_memory: Mapping[Memory, Fraction]
    next_move: Mapping[tuple, Mapping[ActionId, Fraction]]
    memory_update: Mapping[tuple, Mapping[Memory, Fraction]] = field(default_factory=dict)

    @property
    def memory_size(self) -> int:
        return len(self.memory)

    def update(self, action: ActionId, state: State, mem: Memory) -> Mapping[Memory, Fraction]:
        return self.memory_update.get((action, state, mem), {mem: ONE})

    def validate(self, mdp: Mdp) -> "StochasticUpdateStrategy":
        mems = set(self.memory)
        if len(mems) != len(self.memory) or not mems:
            raise InvalidStrategy("memory elements must be distinct and non-empty")
        init = _check_dist("initial_memory", self.initial_memory)
        if not set(init) <= mems:
            raise InvalidStrategy("initial memory distribution uses unknown elements")
        for s in mdp.states:
            enabled = {a.id for a in mdp.act(s)}
            for m in self.memory:
                if (s, m) not in self.next_move:
                    raise InvalidStrategy(f"next move undefined at ({s!r}, {m!r})")
                dist = _check_dist((s, m), self.next_move[(s, m)])
                if not set(dist) <= enabled:
                    raise InvalidStrategy(f"next move at ({s!r}, {m!r}) uses disabled actions")
        for key, dist in self.memory_update.items():
            dist = _check_dist(key, dist)
            if not set(dist) <= mems:
                raise InvalidStrategy(f"memory update {key!r} uses unknown elements")
        return self

    # ---- constructors

    @classmethod
    def memoryless(cls, mdp: Mdp, choice: Mapping[State, object]) -> "StochasticUpdateStrategy":
        """Memoryless strategy from ``state -> action id`` or ``state -> distribution``."""
        nm = {}
        for s in mdp.states:
            c = choice.get(s)
            if c is None:
                c = mdp.act(s)[0].id
            nm[(s, "m")] = {c: ONE} if isinstance(c, str) else dict(c)
        return cls(("m",), {"m": ONE}, nm, {})

    @classmethod
    def from_md(cls, mdp: Mdp, pi: MemorylessDeterministicStrategy) -> "StochasticUpdateStrategy":
        return cls.memoryless(mdp, dict(pi.choice))

    # ---- JSON helpers

    def to_dict(self) -> dict:
        return {
            "memory": list(self.memory),
            "initial_memory": {m: format_fraction(p) for m, p in sorted(self.initial_memory.items()) if p},
            "next_move": [
                {"state": s, "memory": m, "dist": {a: format_fraction(p) for a, p in sorted(d.items()) if p}}
                for (s, m), d in sorted(self.next_move.items())
            ],
            "memory_update": [
                {
                    "action": a,
                    "state": t,
                    "memory": m,
                    "dist": {m2: format_fraction(p) for m2, p in sorted(d.items()) if p},
                }
                for (a, t, m), d in sorted(self.memory_update.items())
            ],
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "StochasticUpdateStrategy":
        try:
            memory = tuple(raw["memory"])
            init = {m: to_fraction(p) for m, p in raw["initial_memory"].items()}
            nm = {
                (e["state"], e["memory"]): {a: to_fraction(p) for a, p in e["dist"].items()}
                for e in raw["next_move"]
            }
            mu = {
                (e["action"], e["state"], e["memory"]): {m: to_fraction(p) for m, p in e["dist"].items()}
                for e in raw.get("memory_update", [])
            }
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidStrategy(f"malformed strategy description: {exc}") from None
        return cls(memory, init, nm, mu)


# ---------------------------------------------------------------- Markov chains


@dataclass(frozen=True)
class MarkovChain:
    """The play ``G^sigma_s``: locations are ``(state, memory, action)`` triples."""

    locations: tuple
    initial: Mapping[Location, Fraction]
    edges: Mapping[Location, tuple]  # loc -> ((probability, loc'), ...)
    location_reward: Mapping[Location, Fraction]

    def successors(self, loc: Location) -> list:
        return [l2 for _, l2 in self.edges[loc]]

    def index(self) -> dict:
        return {l: i for i, l in enumerate(self.locations)}


def _loc_key(loc):
    return loc


def induce_chain(mdp: Mdp, strategy: StochasticUpdateStrategy, start: State | None = None) -> MarkovChain:
    """Build the reachable part of the Markov chain induced by ``strategy`` from ``start``."""
    if start is None:
        start = mdp.initial
    if not mdp.has_state(start):
        raise UnknownTarget("start", start)
    init: dict = {}
    for m, pm in strategy.initial_memory.items():
        if not pm:
            continue
        for a, pa in strategy.next_move[(start, m)].items():
            if pa:
                loc = (start, m, a)
                init[loc] = init.get(loc, ZERO) + pm * pa

    edges = {}
    queue = deque(sorted(init, key=_loc_key))
    seen = set(init)
    while queue:
        loc = queue.popleft()
        _, m, a = loc
        out: dict = {}
        for t, pt in mdp.action(a).transitions:
            for m2, pm in strategy.update(a, t, m).items():
                if not pm:
                    continue
                for a2, pa in strategy.next_move[(t, m2)].items():
                    if not pa:
                        continue
                    nxt = (t, m2, a2)
                    out[nxt] = out.get(nxt, ZERO) + pt * pm * pa
        edges[loc] = tuple(sorted(((p, l2) for l2, p in out.items()), key=lambda e: e[1]))
        for l2 in sorted(out, key=_loc_key):
            if l2 not in seen:
                seen.add(l2)
                queue.append(l2)
    locations = tuple(sorted(seen, key=_loc_key))
    reward = {loc: mdp.action(loc[2]).reward for loc in locations}
    return MarkovChain(locations, dict(init), edges, reward)


def restrict_to_mec(mdp: Mdp, mec) -> Mdp:
    """The sub-MDP formed by a MEC's states and actions (a strongly connected MDP)."""
    from .graph import mec_decomposition

    if mec not in mec_decomposition(mdp):
        raise NotAMec(f"{sorted(mec.states)} / {sorted(mec.actions)} is not a MEC of the model")
    actions = [mdp.action(a) for a in sorted(mec.actions)]
    initial = mdp.initial if mdp.initial in mec.states else sorted(mec.states)[0]
    return Mdp(mec.states, actions, initial)
