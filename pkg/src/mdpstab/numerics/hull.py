"""Lower convex chain of a two-dimensional linear projection of a polytope.

The feasible set of a linear program, projected onto two linear forms
``(m, q)``, is a convex polygon.  Its lower boundary, read as a function of
``m``, is a convex piecewise-linear function whose vertices are found by
repeatedly minimising ``q - slope * m``.  Every vertex keeps a feasible
assignment, so points on the chain come with witnesses (convex
combinations of the two neighbouring vertex assignments).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .lp import EQ, LinearProgram, Status, solve_lp


@dataclass(frozen=True)
class ChainPoint:
    m: Fraction
    q: Fraction
    assignment: dict


def _evaluate(row: dict, assignment: dict) -> Fraction:
    return sum((c * assignment[v] for v, c in row.items()), Fraction(0))


def _lexmin(lp: LinearProgram, first: tuple, second: dict):
    """Minimise ``first`` (direction, row), then ``second`` with the first value pinned."""
    stage = lp.copy()
    stage.set_objective(*first)
    out = solve_lp(stage)
    if out.status == Status.INFEASIBLE:
        return None
    if out.status != Status.OPTIMAL:
        raise ValueError("projection is unbounded")
    pinned = lp.copy()
    pinned.add_constraint(first[1], EQ, out.objective_value)
    pinned.set_objective("min", second)
    out = solve_lp(pinned)
    if out.status != Status.OPTIMAL:
        raise ValueError("projection is unbounded")
    return out.assignment


def lower_chain(lp: LinearProgram, m_row: dict, q_row: dict) -> list:
    """Vertices of the lower boundary of ``{(m(x), q(x)) : x feasible}``, sorted by ``m``.

    Returns an empty list for an infeasible program.
    """
    left = _lexmin(lp, ("min", m_row), q_row)
    if left is None:
        return []
    right = _lexmin(lp, ("max", m_row), q_row)

    def point(asg):
        return ChainPoint(_evaluate(m_row, asg), _evaluate(q_row, asg), asg)

    p, r = point(left), point(right)
    if p.m == r.m:
        return [p]
    out = [p]
    stack = [(p, r)]
    # depth-first refinement, emitted left to right
    while stack:
        a, b = stack.pop()
        slope = (b.q - a.q) / (b.m - a.m)
        probe = lp.copy()
        obj = dict(q_row)
        for v, c in m_row.items():
            obj[v] = obj.get(v, 0) - slope * c
        probe.set_objective("min", obj)
        res = solve_lp(probe)
        if res.status != Status.OPTIMAL:
            raise ValueError("projection is unbounded")
        c = point(res.assignment)
        if c.q - slope * c.m < a.q - slope * a.m:
            stack.append((c, b))
            stack.append((a, c))
        else:
            out.append(b)
    return out


def _mix(a: dict, b: dict, w: Fraction) -> dict:
    """``(1 - w) * a + w * b``."""
    keys = set(a) | set(b)
    zero = Fraction(0)
    return {k: (1 - w) * a.get(k, zero) + w * b.get(k, zero) for k in keys}


def candidates(chain: list, u) -> list:
    """Points of the chain with ``m <= u`` that can minimise a segment-wise concave score."""
    u = Fraction(u)
    out = [p for p in chain if p.m <= u]
    for a, b in zip(chain, chain[1:]):
        if a.m < u < b.m:
            w = (u - a.m) / (b.m - a.m)
            out.append(ChainPoint(u, a.q + w * (b.q - a.q), _mix(a.assignment, b.assignment, w)))
    return out


def best_on_chain(chain: list, u, score: Callable = None):
    """Minimum of ``score(m, q)`` over the region above the chain with ``m <= u``.

    ``score`` must be non-decreasing in ``q`` and concave in ``m`` along
    each segment (``q`` alone and ``q - m**2`` both qualify).  Returns
    ``(value, point)`` or ``None`` when no feasible point has ``m <= u``.
    """
    if score is None:
        score = lambda m, q: q  # noqa: E731
    best = None
    for p in candidates(chain, u):
        val = score(p.m, p.q)
        if best is None or val < best[0]:
            best = (val, p)
    return best


def variance_score(m, q):
    return q - m * m


def multiples(lo, hi, step, endpoints: bool = True) -> list:
    """Multiples of ``step`` in ``[lo, hi]``, optionally with both endpoints added."""
    lo, hi, step = Fraction(lo), Fraction(hi), Fraction(step)
    k = -((-lo) // step)  # ceil(lo / step)
    out = []
    while k * step <= hi:
        out.append(k * step)
        k += 1
    if endpoints:
        out = sorted(set(out) | {lo, hi})
    return out


def sweep_search(lp: LinearProgram, m_row: dict, q_row: dict, u, v, tau, lo, hi):
    """Find ``x`` with ``m(x) <= u`` and ``q(x) - m(x)**2 <= v`` by sweeping ``m``.

    For each multiple ``mu`` of ``tau`` the value of ``m`` is pinned to the
    window ``[mu - tau, min(mu + tau, u)]`` and the quadratic term is replaced
    by its least value over the window, which keeps every accepted point
    sound.  Returns the first feasible assignment in grid order, or ``None``.
    """
    u, v, tau = Fraction(u), Fraction(v), Fraction(tau)
    for mu in multiples(lo, hi, tau):
        wlo, whi = mu - tau, min(mu + tau, u)
        if wlo > whi:
            continue
        floor = Fraction(0) if wlo <= 0 <= whi else min(wlo * wlo, whi * whi)
        probe = lp.copy()
        probe.add_constraint(m_row, ">=", wlo)
        probe.add_constraint(m_row, "<=", whi)
        probe.add_constraint(q_row, "<=", v + floor)
        out = solve_lp(probe)
        if out.feasible:
            return out.assignment
    return None
