"""Exact rational linear algebra (Gauss-Jordan over gmpy2.mpq)."""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq


class SingularSystem(ArithmeticError):
    pass


def to_mpq(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def from_mpq(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def solve(rows: list, rhs: list) -> list:
    """Solve ``A x = b`` for square, non-singular ``A`` given as dense rows."""
    return solve_multi(rows, [rhs])[0]


def solve_multi(rows: list, rhs_cols: list) -> list:
    """Solve ``A X = B`` where ``B`` is given as a list of right-hand-side columns."""
    n = len(rows)
    k = len(rhs_cols)
    a = [[to_mpq(v) for v in row] + [to_mpq(col[i]) for col in rhs_cols] for i, row in enumerate(rows)]
    width = n + k
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise SingularSystem(f"no pivot in column {col}")
        a[col], a[piv] = a[piv], a[col]
        prow = a[col]
        inv = 1 / prow[col]
        nz = [j for j in range(col, width) if prow[j] != 0]
        for j in nz:
            prow[j] *= inv
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if f == 0:
                continue
            row = a[r]
            for j in nz:
                row[j] -= f * prow[j]
    return [[from_mpq(a[i][n + c]) for i in range(n)] for c in range(k)]
