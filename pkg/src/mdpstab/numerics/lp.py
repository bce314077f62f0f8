"""Exact rational linear programming: two-phase tableau simplex with Bland's rule."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from gmpy2 import mpq

from .linalg import from_mpq, to_mpq

LE, EQ, GE = "<=", "=", ">="


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class LinearProgram:
    """Variables are referenced by name; rows are sparse ``{name: coefficient}`` maps."""

    variables: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    objective: tuple | None = None  # ("min" | "max", row)
    nonneg: set = field(default_factory=set)

    def add_variable(self, name: str, nonneg: bool = True) -> str:
        if name in self._names():
            raise ValueError(f"duplicate variable {name!r}")
        self.variables.append(name)
        self._index.add(name)
        if nonneg:
            self.nonneg.add(name)
        return name

    def _names(self) -> set:
        idx = getattr(self, "_index", None)
        if idx is None or len(idx) != len(self.variables):
            idx = set(self.variables)
            self._index = idx
        return idx

    def add_constraint(self, row: Mapping, rel: str, rhs) -> None:
        if rel not in (LE, EQ, GE):
            raise ValueError(f"bad relation {rel!r}")
        names = self._names()
        clean = {}
        for v, c in row.items():
            if v not in names:
                raise KeyError(f"undeclared variable {v!r}")
            c = Fraction(c)
            if c:
                clean[v] = clean.get(v, 0) + c
        self.constraints.append((clean, rel, Fraction(rhs)))

    def set_objective(self, direction: str, row: Mapping) -> None:
        if direction not in ("min", "max"):
            raise ValueError(f"bad direction {direction!r}")
        names = self._names()
        for v in row:
            if v not in names:
                raise KeyError(f"undeclared variable {v!r}")
        self.objective = (direction, {v: Fraction(c) for v, c in row.items() if c})

    def copy(self) -> "LinearProgram":
        return LinearProgram(list(self.variables), list(self.constraints), self.objective, set(self.nonneg))

    def evaluate(self, row: Mapping, assignment: Mapping) -> Fraction:
        return sum((Fraction(c) * assignment[v] for v, c in row.items()), Fraction(0))

    def satisfied_by(self, assignment: Mapping) -> bool:
        for v in self.nonneg:
            if assignment[v] < 0:
                return False
        for row, rel, rhs in self.constraints:
            lhs = self.evaluate(row, assignment)
            if (rel == LE and lhs > rhs) or (rel == GE and lhs < rhs) or (rel == EQ and lhs != rhs):
                return False
        return True


@dataclass
class LpOutcome:
    status: Status
    assignment: dict = field(default_factory=dict)
    objective_value: Fraction | None = None

    @property
    def feasible(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.FEASIBLE)


class _Tableau:
    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows  # list of lists (length ncols)
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols

    def pivot(self, r, c, cost, obj):
        prow = self.rows[r]
        inv = 1 / prow[c]
        nz = [j for j in range(self.ncols) if prow[j] != 0]
        for j in nz:
            prow[j] *= inv
        self.rhs[r] *= inv
        b = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[c]
            if f == 0:
                continue
            for j in nz:
                row[j] -= f * prow[j]
            self.rhs[i] -= f * b
        f = cost[c]
        if f != 0:
            for j in nz:
                cost[j] -= f * prow[j]
            obj[0] -= f * b
        self.basis[r] = c

    def run(self, cost, obj, allowed):
        """Minimise; ``cost`` holds reduced costs, ``obj[0]`` minus the objective value."""
        while True:
            enter = next((j for j in allowed if cost[j] < 0), None)
            if enter is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], enter, cost, obj)


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Solve ``lp`` exactly. Free variables are split into two non-negative parts."""
    cols = []  # (variable, sign)
    for v in lp.variables:
        cols.append((v, 1))
        if v not in lp.nonneg:
            cols.append((v, -1))
    col_of = {}
    for j, (v, sgn) in enumerate(cols):
        col_of.setdefault(v, []).append((j, sgn))
    nstruct = len(cols)

    raw = []
    for row, rel, rhs in lp.constraints:
        dense = {}
        for v, c in row.items():
            for j, sgn in col_of[v]:
                dense[j] = to_mpq(c) * sgn
        b = to_mpq(rhs)
        if b < 0:
            dense = {j: -c for j, c in dense.items()}
            b = -b
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        raw.append((dense, rel, b))

    nslack = sum(1 for _, rel, _ in raw if rel != EQ)
    nart = sum(1 for _, rel, _ in raw if rel != LE)
    ncols = nstruct + nslack + nart
    zero = mpq(0)
    rows, rhs, basis = [], [], []
    s_next, a_next = nstruct, nstruct + nslack
    artificial = set()
    for dense, rel, b in raw:
        row = [zero] * ncols
        for j, c in dense.items():
            row[j] = c
        if rel == LE:
            row[s_next] = mpq(1)
            basis.append(s_next)
            s_next += 1
        else:
            if rel == GE:
                row[s_next] = mpq(-1)
                s_next += 1
            row[a_next] = mpq(1)
            basis.append(a_next)
            artificial.add(a_next)
            a_next += 1
        rows.append(row)
        rhs.append(b)
    tab = _Tableau(rows, rhs, basis, ncols)

    # phase 1
    if artificial:
        cost = [zero] * ncols
        obj = [zero]
        for i, bvar in enumerate(basis):
            if bvar in artificial:
                for j in range(ncols):
                    if j not in artificial:
                        cost[j] -= rows[i][j]
                obj[0] -= rhs[i]
        tab.run(cost, obj, [j for j in range(ncols)])
        if obj[0] != 0:
            return LpOutcome(Status.INFEASIBLE)
        # drive remaining artificial variables out of the basis
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] in artificial:
                j = next((j for j in range(ncols) if j not in artificial and tab.rows[i][j] != 0), None)
                if j is None:
                    del tab.rows[i], tab.rhs[i], tab.basis[i]
                    continue
                tab.pivot(i, j, [zero] * ncols, [zero])
            i += 1
    allowed = [j for j in range(ncols) if j not in artificial]

    if lp.objective is not None:
        direction, orow = lp.objective
        c = [zero] * ncols
        for v, coef in orow.items():
            for j, sgn in col_of[v]:
                c[j] = to_mpq(coef) * sgn * (1 if direction == "min" else -1)
        cost = list(c)
        obj = [zero]
        for i, bvar in enumerate(tab.basis):
            cb = c[bvar]
            if cb != 0:
                row = tab.rows[i]
                for j in range(ncols):
                    if row[j] != 0:
                        cost[j] -= cb * row[j]
                obj[0] -= cb * tab.rhs[i]
        if not tab.run(cost, obj, allowed):
            return LpOutcome(Status.UNBOUNDED)

    values = [zero] * ncols
    for i, bvar in enumerate(tab.basis):
        values[bvar] = tab.rhs[i]
    assignment = {}
    for v in lp.variables:
        assignment[v] = from_mpq(sum((values[j] * sgn for j, sgn in col_of[v]), zero))
    if not lp.satisfied_by(assignment):  # pragma: no cover - exact arithmetic guard
        raise RuntimeError("simplex produced an infeasible assignment")
    if lp.objective is None:
        return LpOutcome(Status.FEASIBLE, assignment)
    return LpOutcome(Status.OPTIMAL, assignment, lp.evaluate(lp.objective[1], assignment))
