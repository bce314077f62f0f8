"""Qualitative graph analyses on MDPs and Markov chains."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import networkx as nx

from .model import MarkovChain, Mdp, MemorylessDeterministicStrategy


@dataclass(frozen=True)
class Mec:
    states: frozenset
    actions: frozenset

    def key(self) -> tuple:
        return (tuple(sorted(self.states)), tuple(sorted(self.actions)))

    def __lt__(self, other):
        return self.key() < other.key()

    def label(self) -> str:
        return "{" + ",".join(sorted(self.states)) + "}"


@dataclass(frozen=True)
class Bscc:
    locations: frozenset


def _sccs(nodes: Iterable, edges: Iterable[tuple]) -> list:
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    return [frozenset(c) for c in nx.strongly_connected_components(g)]


def mec_decomposition(mdp: Mdp, allowed: Iterable[str] | None = None) -> list:
    """Maximal end components, optionally of the sub-MDP using only ``allowed`` actions.

    Iterated SCC refinement: actions that can leave their SCC are dropped,
    states left without actions are dropped, until nothing changes.
    """
    actions = set(mdp.action_ids if allowed is None else allowed)
    states = {mdp.action(a).source for a in actions}
    while True:
        edges = [(mdp.action(a).source, t) for a in actions for t in mdp.action(a).successors]
        comps = _sccs(states, ((s, t) for s, t in edges if t in states))
        comp_of = {s: i for i, c in enumerate(comps) for s in c}
        keep = set()
        for a in actions:
            act = mdp.action(a)
            c = comp_of.get(act.source)
            if c is not None and all(comp_of.get(t) == c for t in act.successors):
                keep.add(a)
        live = {mdp.action(a).source for a in keep}
        if keep == actions and live == states:
            break
        actions, states = keep, live
    by_comp: dict = {}
    for a in actions:
        by_comp.setdefault(comp_of[mdp.action(a).source], set()).add(a)
    mecs = [Mec(comps[i], frozenset(acts)) for i, acts in by_comp.items()]
    return sorted(mecs)


def mec_of_state(mecs: list) -> dict:
    return {s: m for m in mecs for s in m.states}


def attractor(mdp: Mdp, target: set, allowed: set | None):
    """Almost-sure reachability by the classical nested fixpoint.

    Returns ``(winning, rank, choice)`` where ``choice`` maps each winning
    non-target state to an action that stays in the winning set and has a
    successor of strictly smaller rank.
    """
    def enabled(s):
        return [a for a in mdp.act(s) if allowed is None or a.id in allowed]

    win = set(mdp.states)
    while True:
        safe = {s: [a for a in enabled(s) if set(a.successors) <= win] for s in win}
        rank = {s: 0 for s in target if s in win}
        choice = {}
        frontier = sorted(rank)
        level = 0
        while frontier:
            level += 1
            nxt = []
            for s in sorted(win - set(rank)):
                for a in safe[s]:
                    if any(t in rank and rank[t] < level for t in a.successors):
                        rank[s] = level
                        choice[s] = a.id
                        nxt.append(s)
                        break
            frontier = nxt
        reached = set(rank)
        if reached == win:
            return win, rank, choice, safe
        win = reached


def almost_sure_reach(mdp: Mdp, target: Iterable[str], allowed: Iterable[str] | None = None):
    """States winning ``Reach(target)`` with probability 1, plus a memoryless pure witness.

    The witness is defined on the winning set only.
    """
    target = set(target)
    allowed = None if allowed is None else set(allowed)
    win, _, choice, safe = attractor(mdp, target, allowed)
    for s in sorted(win & target):
        opts = safe.get(s) or [a for a in mdp.act(s) if allowed is None or a.id in allowed] or list(mdp.act(s))
        choice[s] = opts[0].id
    return frozenset(win), MemorylessDeterministicStrategy(choice)


def almost_sure_cobuchi(mdp: Mdp, allowed: Iterable[str]):
    """States from which eventually only ``allowed`` actions occur, almost surely."""
    allowed = set(allowed)
    mecs = mec_decomposition(mdp, allowed)
    core = {s for m in mecs for s in m.states}
    win, reach = almost_sure_reach(mdp, core)
    choice = dict(reach.choice)
    for m in mecs:
        for s in m.states:
            choice[s] = min(a.id for a in mdp.act(s) if a.id in m.actions)
    return win, MemorylessDeterministicStrategy({s: a for s, a in choice.items() if s in win})


def bsccs(chain: MarkovChain) -> list:
    edges = [(l, l2) for l in chain.locations for _, l2 in chain.edges[l]]
    comps = _sccs(chain.locations, edges)
    out = []
    for c in comps:
        if all(l2 in c for l in c for _, l2 in chain.edges[l]):
            out.append(Bscc(c))
    return sorted(out, key=lambda b: min(b.locations))
