"""Exact rational linear algebra: elimination, span membership, solving.

Everything runs over ``fractions.Fraction`` with a deterministic pivot order
(first nonzero entry in row-scan order), so results are reproducible
bit-for-bit across runs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple[Fraction, ...]


def vec(values: Iterable) -> Vector:
    return tuple(Fraction(v) for v in values)


def zero_vector(n: int) -> Vector:
    return tuple([Fraction(0)] * n)


def is_zero_vector(v: Sequence[Fraction]) -> bool:
    return all(c == 0 for c in v)


class RowSpace:
    """Incrementally maintained reduced row echelon span."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[list[Fraction]] = []
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _reduce(self, v: Sequence[Fraction]) -> list[Fraction]:
        w = [Fraction(c) for c in v]
        for row, p in zip(self.rows, self.pivots):
            if w[p] != 0:
                f = w[p]
                for j in range(p, self.dim):
                    w[j] -= f * row[j]
        return w

    def contains(self, v: Sequence[Fraction]) -> bool:
        return is_zero_vector(self._reduce(v))

    def add(self, v: Sequence[Fraction]) -> bool:
        """Insert a vector; returns True if it enlarged the span."""
        w = self._reduce(v)
        for p in range(self.dim):
            if w[p] != 0:
                inv = Fraction(1) / w[p]
                w = [c * inv for c in w]
                for row in self.rows:
                    if row[p] != 0:
                        f = row[p]
                        for j in range(self.dim):
                            row[j] -= f * w[j]
                idx = 0
                while idx < len(self.pivots) and self.pivots[idx] < p:
                    idx += 1
                self.rows.insert(idx, w)
                self.pivots.insert(idx, p)
                return True
        return False

    def basis(self) -> list[Vector]:
        return [tuple(row) for row in self.rows]


def span_rank(vectors: Iterable[Sequence[Fraction]], dim: int) -> int:
    space = RowSpace(dim)
    for v in vectors:
        space.add(v)
    return space.rank


def solve_combination(columns: Sequence[Sequence[Fraction]],
                      target: Sequence[Fraction]) -> list[Fraction] | None:
    """Solve ``sum_j c_j * columns[j] = target`` exactly.

    Returns one solution (free coefficients set to zero, pivots chosen in
    column order) or None when the target is outside the span."""
    m = len(target)
    k = len(columns)
    rows = [[Fraction(columns[j][i]) for j in range(k)] + [Fraction(target[i])]
            for i in range(m)]

    pivot_cols: list[int] = []
    r = 0
    for c in range(k):
        pivot = None
        for i in range(r, m):
            if rows[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivot_cols.append(c)
        r += 1
        if r == m:
            break

    for i in range(r, m):
        if rows[i][k] != 0:
            return None

    solution = [Fraction(0)] * k
    for i, c in enumerate(pivot_cols):
        solution[c] = rows[i][k]
    return solution
