"""Independent brute-force reference implementations used by the tests.

None of these import solver code beyond the model types; they trade speed
for obviousness.
"""

import itertools
from fractions import Fraction

import numpy as np

from mdpstab.model import enumerate_md_strategies


# ---------------------------------------------------------------- end components


def _strongly_connected(states, actions, mdp) -> bool:
    states = set(states)
    if not states:
        return False
    succ = {s: set() for s in states}
    for a in actions:
        act = mdp.action(a)
        succ[act.source] |= set(act.successors)

    def reach(s):
        seen, stack = {s}, [s]
        while stack:
            x = stack.pop()
            for y in succ[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    return all(reach(s) >= states for s in states)


def end_components(mdp):
    """Every end component as (states, actions), by enumerating action subsets."""
    ids = mdp.action_ids
    out = []
    for k in range(1, len(ids) + 1):
        for acts in itertools.combinations(ids, k):
            states = {mdp.action(a).source for a in acts}
            if all(set(mdp.action(a).successors) <= states for a in acts) and _strongly_connected(states, acts, mdp):
                out.append((frozenset(states), frozenset(acts)))
    return out


def brute_mecs(mdp) -> set:
    ecs = end_components(mdp)
    return {
        (s, a)
        for s, a in ecs
        if not any((s, a) != (s2, a2) and s <= s2 and a <= a2 for s2, a2 in ecs)
    }


# ---------------------------------------------------------------- linear programs


def vertices(constraints, n) -> list:
    """All basic feasible points of ``{x >= 0 : constraints}``.

    ``constraints`` are ``(coeffs, rel, rhs)`` with ``rel`` in ``<=, =, >=``.
    """
    rows = []
    for coeffs, rel, rhs in constraints:
        if rel in ("<=", "="):
            rows.append((list(coeffs), rhs))
        if rel in (">=", "="):
            rows.append(([-c for c in coeffs], -rhs))
    for i in range(n):
        rows.append(([-1 if j == i else 0 for j in range(n)], 0))

    def feasible(x):
        return all(sum(c * v for c, v in zip(coeffs, x)) <= rhs for coeffs, rhs in rows)

    out = set()
    for tight in itertools.combinations(range(len(rows)), n):
        x = _gauss([[Fraction(c) for c in rows[i][0]] for i in tight], [Fraction(rows[i][1]) for i in tight])
        if x is not None and feasible(x):
            out.add(tuple(x))
    return sorted(out)


def vertex_enumeration(objective, constraints, n):
    """Minimum of ``objective . x`` over a bounded polytope, or ``None`` when empty."""
    best = None
    for x in vertices(constraints, n):
        val = sum(c * v for c, v in zip(objective, x))
        if best is None or val < best[0]:
            best = (val, list(x))
    return best


def lower_hull(points) -> list:
    """Strict vertices of the lower convex hull of 2-D points, left to right."""
    pts = sorted(set(points))
    # lowest point per abscissa
    first = {}
    for m, q in pts:
        first.setdefault(m, q)
    pts = sorted(first.items())
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (m1, q1), (m2, q2) = hull[-2], hull[-1]
            if (q2 - q1) * (p[0] - m1) >= (p[1] - q1) * (m2 - m1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _gauss(a, b):
    n = len(a)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


# ---------------------------------------------------------------- Markov chains


def chain_matrix(chain):
    idx = chain.index()
    n = len(chain.locations)
    p = np.zeros((n, n))
    for l in chain.locations:
        for prob, l2 in chain.edges[l]:
            p[idx[l], idx[l2]] += float(prob)
    r = np.array([float(chain.location_reward[l]) for l in chain.locations])
    init = np.zeros(n)
    for l, prob in chain.initial.items():
        init[idx[l]] += float(prob)
    return p, r, init


def cesaro_stats(chain, steps: int = 4000):
    """Floating-point (E[mp], Var[mp], E[lv], E[hv]) from the Cesaro limit of the chain.

    The limit matrix is approximated by averaging powers of the lazy chain,
    which has the same limit and converges geometrically.
    """
    p, r, init = chain_matrix(chain)
    n = len(r)
    lazy = 0.5 * (np.eye(n) + p)
    limit = np.linalg.matrix_power(lazy, steps)
    g = limit @ r  # mean payoff of the BSCC entered from each location
    gs = limit @ (r * r)
    e = init @ g
    e_mp2 = init @ (limit @ (g * g))
    ms = init @ gs
    return e, e_mp2 - e * e, ms - e_mp2, ms - e * e


# ---------------------------------------------------------------- strategies and reachability


def _md_graph(mdp, pi):
    return {s: set(mdp.action(pi.choice[s]).successors) for s in mdp.states}


def reachable(graph, start):
    seen, stack = {start}, [start]
    while stack:
        x = stack.pop()
        for y in graph[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def almost_sure_reach_states(mdp, target) -> set:
    """States with a memoryless pure strategy reaching ``target`` with probability 1.

    Under a fixed pure memoryless strategy the target is reached almost surely
    iff every state reachable (before the target) can still reach it.
    """
    target = set(target)
    out = set()
    for pi in enumerate_md_strategies(mdp):
        graph = {s: (set() if s in target else g) for s, g in _md_graph(mdp, pi).items()}
        for s in mdp.states:
            if s in out:
                continue
            if all(target & reachable(graph, x) for x in reachable(graph, s)):
                out.add(s)
    return out


def recurrent_rewards(mdp, pi, start) -> set:
    """Rewards of the actions played in the bottom components reachable from ``start``."""
    graph = _md_graph(mdp, pi)
    reach = reachable(graph, start)
    out = set()
    for s in reach:
        if reachable(graph, s) and all(s in reachable(graph, t) for t in reachable(graph, s)):
            out.add(mdp.action(pi.choice[s]).reward)
    return out


def zero_hybrid_levels(mdp, start) -> set:
    """Levels ``r`` such that some pure memoryless strategy only sees reward ``r`` in the long run."""
    levels = set()
    for pi in enumerate_md_strategies(mdp):
        rec = recurrent_rewards(mdp, pi, start)
        if len(rec) == 1:
            levels |= rec
    return levels


def zero_hybrid_value(mdp, start):
    levels = zero_hybrid_levels(mdp, start)
    return min(levels) if levels else None


def zero_local_value(mdp, start, tol: float = 1e-9):
    """Least expected settled level, by brute force over stop-or-move policies.

    At each state the policy either stops (and is worth the least level with
    zero hybrid variance there) or plays a fixed action; policies that do not
    stop almost surely are discarded.
    """
    stop_value = {s: zero_hybrid_value(mdp, s) for s in mdp.states}
    options = [[None] + [a.id for a in mdp.act(s)] for s in mdp.states]
    best = None
    for combo in itertools.product(*options):
        pol = dict(zip(mdp.states, combo))
        if any(pol[s] is None and stop_value[s] is None for s in mdp.states):
            continue
        stops = {s for s in mdp.states if pol[s] is None}
        graph = {s: (set() if s in stops else set(mdp.action(pol[s]).successors)) for s in mdp.states}
        if not all(stops & reachable(graph, x) for x in reachable(graph, start)):
            continue
        moving = [s for s in reachable(graph, start) if s not in stops]
        idx = {s: i for i, s in enumerate(moving)}
        a = np.eye(len(moving))
        b = np.zeros(len(moving))
        for s in moving:
            for t, p in mdp.action(pol[s]).transitions:
                if t in stops:
                    b[idx[s]] += float(p) * float(stop_value[t])
                else:
                    a[idx[s], idx[t]] -= float(p)
        vals = np.linalg.solve(a, b) if moving else np.zeros(0)
        v = float(stop_value[start]) if start in stops else vals[idx[start]]
        if best is None or v < best - tol:
            best = v
    return best


def md_stats(mdp, start, kind_stats):
    """``kind_stats(chain)`` for every pure memoryless strategy."""
    from mdpstab.model import StochasticUpdateStrategy, induce_chain

    out = []
    for pi in enumerate_md_strategies(mdp):
        chain = induce_chain(mdp, StochasticUpdateStrategy.from_md(mdp, pi), start)
        out.append((pi, kind_stats(chain)))
    return out

