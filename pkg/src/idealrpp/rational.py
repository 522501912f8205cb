"""Exact rational linear algebra.

Everything here works on ``fractions.Fraction`` entries.  Elimination is
fraction-free: rows are scaled to integers first and reduced with Bareiss
steps, so intermediate values stay bounded by minors of the input.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

Rat = Fraction


class Singular(ValueError):
    """Raised when a square system has no unique solution."""


def as_rat(value) -> Fraction:
    """Parse ints, Fractions, decimal strings or ``"p/q"`` strings exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats are only accepted when they are exact binary fractions
        return Fraction(value)
    return Fraction(value)


def rat_str(value: Fraction) -> str:
    value = as_rat(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class RatMatrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("_rows", "cols")

    def __init__(self, rows: Iterable[Iterable], cols: int | None = None):
        data = tuple(tuple(as_rat(v) for v in row) for row in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        for row in data:
            if len(row) != cols:
                raise ValueError("matrix rows must all have the same length")
        self._rows = data
        self.cols = cols

    @property
    def rows(self) -> int:
        return len(self._rows)

    @property
    def entries(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._rows[i]

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def __iter__(self):
        return iter(self._rows)

    def __len__(self):
        return len(self._rows)

    def __eq__(self, other):
        return isinstance(other, RatMatrix) and self._rows == other._rows and self.cols == other.cols

    def __hash__(self):
        return hash((self._rows, self.cols))

    def __repr__(self):
        body = "; ".join(" ".join(rat_str(v) for v in r) for r in self._rows)
        return f"RatMatrix({self.rows}x{self.cols}: {body})"

    def transpose(self) -> "RatMatrix":
        return RatMatrix(zip(*self._rows), cols=self.rows) if self._rows else RatMatrix([], cols=0)

    def select(self, indices: Sequence[int]) -> "RatMatrix":
        return RatMatrix((self._rows[i] for i in indices), cols=self.cols)

    def augment(self, column: Sequence) -> "RatMatrix":
        if len(column) != self.rows:
            raise ValueError("column length must match row count")
        return RatMatrix((r + (as_rat(v),) for r, v in zip(self._rows, column)), cols=self.cols + 1)


def integer_row(row: Sequence[Fraction]) -> list[int]:
    """Scale a rational row to a primitive integer row with the same direction."""
    den = 1
    for v in row:
        den = lcm(den, v.denominator)
    ints = [int(v * den) for v in row]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def _bareiss_rank(rows: list[list[int]], ncols: int) -> int:
    m = [r[:] for r in rows]
    nrows = len(m)
    rank = 0
    prev = 1
    for col in range(ncols):
        piv = next((i for i in range(rank, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][col]
        for i in range(rank + 1, nrows):
            f = m[i][col]
            ri = m[i]
            rr = m[rank]
            for j in range(col, ncols):
                ri[j] = (ri[j] * p - rr[j] * f) // prev
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


def rank(m: RatMatrix | Sequence[Sequence]) -> int:
    """Exact rank by fraction-free elimination."""
    if not isinstance(m, RatMatrix):
        m = RatMatrix(m)
    if m.rows == 0 or m.cols == 0:
        return 0
    return _bareiss_rank([integer_row(r) for r in m], m.cols)


def solve_square(a: RatMatrix | Sequence[Sequence], b: Sequence) -> tuple[Fraction, ...]:
    """Solve ``a x = b`` exactly; raise Singular if ``a`` is rank deficient."""
    if not isinstance(a, RatMatrix):
        a = RatMatrix(a)
    n = a.rows
    if a.cols != n or len(b) != n:
        raise ValueError("solve_square needs a square matrix and a matching right side")
    # augmented integer rows, Bareiss forward pass
    m = [integer_row(list(r) + [as_rat(v)]) for r, v in zip(a, b)]
    prev = 1
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            raise Singular(f"no pivot in column {col}")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        for i in range(col + 1, n):
            f = m[i][col]
            ri = m[i]
            rc = m[col]
            for j in range(col, n + 1):
                ri[j] = (ri[j] * p - rc[j] * f) // prev
        prev = p
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(m[i][n])
        for j in range(i + 1, n):
            s -= m[i][j] * x[j]
        x[i] = s / m[i][i]
    return tuple(x)


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    m = [r[:] for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][col]
        m[r] = [v / p for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def primitive(vec: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Scale to coprime integers with the first nonzero entry positive."""
    ints = integer_row([as_rat(v) for v in vec])
    lead = next((v for v in ints if v != 0), 0)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(Fraction(v) for v in ints)


def left_nullspace(m: RatMatrix | Sequence[Sequence]) -> list[tuple[Fraction, ...]]:
    """Basis of ``{p : m^T p = 0}``, each vector primitive integral."""
    if not isinstance(m, RatMatrix):
        m = RatMatrix(m)
    n = m.rows
    if n == 0:
        return []
    mt = [list(col) for col in zip(*m.entries)] if m.cols else []
    if not mt:
        return [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
    red, pivots = _rref(mt, n)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            vec[pc] = -row[f]
        basis.append(primitive(vec))
    return basis


def matvec(m: RatMatrix, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(sum((a * b for a, b in zip(r, v)), Fraction(0)) for r in m)
