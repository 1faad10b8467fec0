"""Exact dense linear algebra over Q via fraction-free (Bareiss) elimination.

Rows are first cleared of denominators, so elimination runs on Python ints;
Bareiss' exact division keeps intermediate entries equal to minors of the
input instead of letting them grow geometrically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import List, Sequence

Matrix = List[List[Fraction]]


def _integer_rows(rows):
    """Scale each row to integers; returns (int rows, per-row scale factors)."""
    out, scales = [], []
    for row in rows:
        d = 1
        for v in row:
            d = lcm(d, Fraction(v).denominator)
        out.append([int(Fraction(v) * d) for v in row])
        scales.append(d)
    return out, scales


@dataclass
class Echelon:
    """Fraction-free row echelon form of an integer matrix."""

    rows: list
    pivots: list  # (row, column) pairs
    sign: int
    last_pivot: int
    ncols: int
    row_perm: list = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.pivots)


def bareiss_echelon(int_rows: list, ncols: int | None = None) -> Echelon:
    """Fraction-free echelon form; pivots chosen by smallest bit length.

    Only the first ``ncols`` columns are eliminated on (the rest, e.g. an
    augmented right-hand side, are carried along).
    """
    a = [list(r) for r in int_rows]
    m = len(a)
    total = len(a[0]) if a else 0
    ncols = total if ncols is None else ncols
    perm = list(range(m))
    prev = 1
    sign = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r >= m:
            break
        best, best_bits = None, None
        for i in range(r, m):
            v = a[i][c]
            if v:
                bits = abs(v).bit_length()
                if best is None or bits < best_bits:
                    best, best_bits = i, bits
        if best is None:
            continue
        if best != r:
            a[r], a[best] = a[best], a[r]
            perm[r], perm[best] = perm[best], perm[r]
            sign = -sign
        p = a[r][c]
        row_r = a[r]
        for i in range(r + 1, m):
            row_i = a[i]
            f = row_i[c]
            for j in range(c + 1, total):
                row_i[j] = (p * row_i[j] - f * row_r[j]) // prev
            row_i[c] = 0
        pivots.append((r, c))
        prev = p
        r += 1
    return Echelon(a, pivots, sign, prev, ncols, perm)


def determinant(matrix: Sequence[Sequence]) -> Fraction:
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    if any(len(row) != n for row in matrix):
        raise ValueError("determinant needs a square matrix")
    rows, scales = _integer_rows(matrix)
    ech = bareiss_echelon(rows)
    if ech.rank < n:
        return Fraction(0)
    denom = 1
    for s in scales:
        denom *= s
    return Fraction(ech.sign * ech.last_pivot, denom)


def rank(matrix: Sequence[Sequence]) -> int:
    if not matrix:
        return 0
    rows, _ = _integer_rows(matrix)
    return bareiss_echelon(rows).rank


def _back_substitute(ech: Echelon, free_values: dict) -> list:
    """Solve the echelon system (augmented column last) for all unknowns."""
    n = ech.ncols
    x: list = [None] * n
    for c, v in free_values.items():
        x[c] = Fraction(v)
    for r, c in reversed(ech.pivots):
        row = ech.rows[r]
        s = Fraction(row[n]) if len(row) > n else Fraction(0)
        for j in range(c + 1, n):
            if row[j]:
                s -= row[j] * x[j]
        x[c] = s / row[c]
    return x


def kernel(matrix: Sequence[Sequence]) -> list:
    """A basis of the right null space, one vector per free column."""
    if not matrix:
        return []
    ncols = len(matrix[0])
    rows, _ = _integer_rows(matrix)
    ech = bareiss_echelon(rows)
    pivot_cols = {c for _, c in ech.pivots}
    basis = []
    for free in range(ncols):
        if free in pivot_cols:
            continue
        values = {c: (1 if c == free else 0) for c in range(ncols) if c not in pivot_cols}
        basis.append(_back_substitute(ech, values))
    return basis


class SingularMatrix(ArithmeticError):
    pass


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> list:
    """Unique solution of ``matrix @ x = rhs``; raises SingularMatrix otherwise."""
    n = len(matrix)
    if n == 0:
        return []
    ncols = len(matrix[0])
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    rows, _ = _integer_rows(aug)
    ech = bareiss_echelon(rows, ncols)
    if ech.rank < ncols:
        raise SingularMatrix(f"rank {ech.rank} < {ncols}")
    for r in range(ech.rank, n):
        if ech.rows[r][ncols]:
            raise SingularMatrix("inconsistent system")
    return _back_substitute(ech, {})


def inverse(matrix: Sequence[Sequence]) -> Matrix:
    n = len(matrix)
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        cols.append(solve(matrix, e))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def mat_vec(matrix, vec):
    return [sum((a * b for a, b in zip(row, vec)), Fraction(0)) for row in matrix]


def mat_mul(a, b):
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def transpose(matrix):
    return [list(r) for r in zip(*matrix)]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
