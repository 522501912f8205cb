"""Idealness by exhaustive extreme-point enumeration.

A vertex of ``{A z >= b, E z = e}`` in ``n`` variables is a feasible point
where ``n`` linearly independent rows are tight.  The search walks row
subsets in lexicographic order, always including the equalities, and keeps
an integer echelon basis as it goes: a row that is dependent on the rows
already chosen kills every subset that would contain it, so those subsets
are never visited one by one.

Feasibility and deduplication run on integers: each candidate is held as
``X / D`` with a positive common denominator.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, gcd
from typing import Sequence

from .mblp import EQ, GE, ConstraintRow, ConstraintTag, MblpModel, Point, Relaxation, Phi, compose_relaxation, make_row
from .rational import RatMatrix, integer_row, left_nullspace, rank

DEFAULT_VAR_CAP = 12
DEFAULT_ROW_CAP = 40


class DimensionCapExceeded(ValueError):
    pass


class RowCapExceeded(ValueError):
    pass


class EmptyRelaxation(ValueError):
    pass


class UnboundedRelaxation(ValueError):
    pass


@dataclass(frozen=True)
class Vertex:
    point: Point
    subsets: tuple[tuple[int, ...], ...]
    tight: tuple[int, ...]


@dataclass(frozen=True)
class FractionalWitness:
    point: Point
    tight_subset: tuple[int, ...]
    rank_certificate: str
    phi_value: Fraction
    tight_all: tuple[int, ...] = ()

    def to_json(self, relax: Relaxation | None = None) -> dict:
        rows = relax.rows if relax is not None else None
        tags = [rows[i].tag.label() for i in self.tight_subset] if rows else list(self.tight_subset)
        out = {"point": self.point.to_json(), "tight": tags, "phi": _rs(self.phi_value)}
        return out


@dataclass
class VertexReport:
    vertices: list[Vertex]
    fractional: list[FractionalWitness]
    subsets_examined: int
    subsets_rank_deficient: int
    n_vars: int
    n_rows: int
    bounded: bool = True

    @property
    def points(self) -> list[Point]:
        return [v.point for v in self.vertices]


def _rs(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


# ---------------------------------------------------------------- search core

def _normalize(v: list[int]) -> list[int]:
    g = 0
    for x in v:
        if x:
            g = gcd(g, x)
            if g == 1:
                return v
    if g > 1:
        return [x // g for x in v]
    return v


def _reduce(v: list[int], basis) -> list[int]:
    for b, p in basis:
        f = v[p]
        if f:
            bp = b[p]
            v = [x * bp - y * f for x, y in zip(v, b)]
    return _normalize(v)


def _back_substitute(basis, n: int, homogeneous: bool = False, free: int | None = None):
    """Solve the echelon basis; returns integer numerators X and denominator D > 0."""
    X = [0] * n
    D = 1
    if free is not None:
        X[free] = 1
    for b, p in reversed(basis):
        s = 0 if homogeneous else b[n] * D
        for q in range(n):
            if q != p and b[q] and X[q]:
                s -= b[q] * X[q]
        bp = b[p]
        if bp < 0:
            bp = -bp
            s = -s
        if bp != 1:
            X = [x * bp for x in X]
            D *= bp
        X[p] = s
        g = D
        for x in X:
            if x:
                g = gcd(g, x)
                if g == 1:
                    break
        if g > 1:
            X = [x // g for x in X]
            D //= g
    return X, D


@dataclass
class _Problem:
    n: int
    dense: list[list[int]]            # integer rows, rhs last
    sparse: list[tuple[tuple, int, bool]]  # ((col, coef)...), rhs, is_equality
    eq_basis: list
    eq_used: tuple[int, ...]
    ineq: tuple[int, ...]
    need: int
    consistent: bool


def _prepare(relax: Relaxation) -> _Problem:
    n = relax.n
    dense = []
    sparse = []
    for row in relax.rows:
        ints = integer_row(list(row.coeffs) + [row.rhs])
        dense.append(ints)
        sparse.append((tuple((q, a) for q, a in enumerate(ints[:n]) if a), ints[n], row.sense == EQ))
    basis = []
    used = []
    consistent = True
    for i, row in enumerate(relax.rows):
        if row.sense != EQ:
            continue
        v = _reduce(dense[i][:], basis)
        if any(v[:n]):
            p = next(q for q in range(n) if v[q])
            basis.append((v, p))
            used.append(i)
        elif v[n]:
            consistent = False
    ineq = tuple(i for i, row in enumerate(relax.rows) if row.sense != EQ)
    return _Problem(n, dense, sparse, basis, tuple(used), ineq, n - len(basis), consistent)


def _feasible(prob: _Problem, X, D) -> bool:
    for terms, rhs, is_eq in prob.sparse:
        s = -rhs * D
        for q, a in terms:
            s += a * X[q]
        if s < 0 or (is_eq and s != 0):
            return False
    return True


def _ray_found(prob: _Problem, basis) -> bool:
    n = prob.n
    pivots = {p for _, p in basis}
    free = next(q for q in range(n) if q not in pivots)
    X, _ = _back_substitute(basis, n, homogeneous=True, free=free)
    sign = 0
    for terms, _rhs, is_eq in prob.sparse:
        s = 0
        for q, a in terms:
            s += a * X[q]
        if s == 0:
            continue
        if is_eq:
            return False
        sg = 1 if s > 0 else -1
        if sign == 0:
            sign = sg
        elif sg != sign:
            return False
    return True


def _edge_ray(prob: _Problem, tight: Sequence[int]) -> bool:
    """Does some edge leaving this vertex run off to infinity?

    Edges are cut out by ``need - 1`` independent tight inequalities plus
    the equalities.  A pointed polyhedron is unbounded exactly when one of
    its vertices has such an edge.
    """
    if prob.need == 0:
        return False
    ineq = set(prob.ineq)
    rows = [i for i in tight if i in ineq]
    n, want = prob.n, prob.need - 1

    def dfs(start, basis, k):
        if k == want:
            return _ray_found(prob, basis)
        for c in range(start, len(rows) - (want - k - 1)):
            v = _reduce(prob.dense[rows[c]][:], basis)
            if not any(v[:n]):
                continue
            if dfs(c + 1, basis + [(v, next(q for q in range(n) if v[q]))], k + 1):
                return True
        return False

    return dfs(0, list(prob.eq_basis), 0)


def _search_unit(prob: _Problem, first: int | None):
    """Enumerate subsets whose first inequality position is ``first``.

    ``first`` is None for the degenerate case where equalities alone fix
    the point.  Returns (leaves, hits) where hits are (subset, key) for
    every full-rank feasible subset in lexicographic order.
    """
    n, need, ineq = prob.n, prob.need, prob.ineq
    m = len(ineq)
    hits = []
    state = {"leaves": 0}

    def leaf(basis, chosen):
        state["leaves"] += 1
        X, D = _back_substitute(basis, n)
        if _feasible(prob, X, D):
            hits.append((tuple(sorted(prob.eq_used + tuple(ineq[c] for c in chosen))), (tuple(X), D)))

    def dfs(start, basis, chosen):
        k = len(chosen)
        if k == need:
            leaf(basis, chosen)
            return
        stop = m - (need - k - 1)
        for c in range(start, stop):
            v = _reduce(prob.dense[ineq[c]][:], basis)
            if not any(v[:n]):
                continue
            p = next(q for q in range(n) if v[q])
            dfs(c + 1, basis + [(v, p)], chosen + [c])

    if first is None:
        dfs(0, list(prob.eq_basis), [])
        return state["leaves"], hits
    v = _reduce(prob.dense[ineq[first]][:], prob.eq_basis)
    if any(v[:n]):
        p = next(q for q in range(n) if v[q])
        dfs(first + 1, list(prob.eq_basis) + [(v, p)], [first])
    return state["leaves"], hits


def _run_unit(args):
    prob, first = args
    return _search_unit(prob, first)


def enumerate_extreme_points(r: Relaxation | MblpModel, workers: int = 1, var_cap: int = DEFAULT_VAR_CAP,
                             row_cap: int = DEFAULT_ROW_CAP) -> VertexReport:
    """All vertices of the relaxation, found exactly.

    ``workers`` > 1 splits the subsets by their first inequality row and
    merges in that order, so the report does not depend on the count.
    """
    relax = r if isinstance(r, Relaxation) else compose_relaxation(r)
    n = relax.n
    if n > var_cap:
        raise DimensionCapExceeded(f"{n} variables exceeds the cap of {var_cap}")
    if len(relax.rows) > row_cap:
        raise DimensionCapExceeded(f"{len(relax.rows)} rows exceeds the cap of {row_cap}")
    prob = _prepare(relax)
    examined = comb(len(prob.ineq), prob.need) if prob.need >= 0 else 0
    if not prob.consistent:
        return VertexReport([], [], examined, examined, n, len(relax.rows))
    if prob.need == 0:
        units = [None]
    else:
        units = list(range(len(prob.ineq) - prob.need + 1))
    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_unit, [(prob, u) for u in units]))
    else:
        results = [_search_unit(prob, u) for u in units]
    leaves = 0
    found: dict = {}
    order = []
    for lv, hits in results:
        leaves += lv
        for subset, key in hits:
            if key not in found:
                found[key] = []
                order.append(key)
            found[key].append(subset)
    vertices = []
    for key in order:
        X, D = key
        z = tuple(Fraction(x, D) for x in X)
        pt = Point.split(z, relax.n_c)
        tight = tuple(i for i, row in enumerate(relax.rows) if row.residual(z) == 0)
        vertices.append(Vertex(pt, tuple(found[key]), tight))
    ray = any(_edge_ray(prob, v.tight) for v in vertices)
    report = VertexReport(vertices, [], examined, examined - leaves, n, len(relax.rows), bounded=not ray)
    report.fractional = [_witness(relax, v) for v in vertices if any(y.denominator != 1 for y in v.point.y)]
    return report


def _witness(relax: Relaxation, v: Vertex) -> FractionalWitness:
    subset = v.subsets[0]
    return FractionalWitness(
        point=v.point,
        tight_subset=subset,
        rank_certificate=f"rows {list(subset)} have rank {relax.n} = n_c + n_b",
        phi_value=Phi(v.point.y),
        tight_all=v.tight,
    )


def assert_sound(relax: Relaxation, report: VertexReport) -> None:
    """Re-check every vertex: feasible, and tight on a full-rank subset."""
    a = RatMatrix([row.coeffs for row in relax.rows])
    for v in report.vertices:
        z = v.point.z
        for row in relax.rows:
            res = row.residual(z)
            if res < 0 or (row.sense == EQ and res != 0):
                raise AssertionError(f"vertex {z} violates {row.tag.label()}")
        if rank(a.select(v.tight)) != relax.n:
            raise AssertionError(f"vertex {z} is not tight on {relax.n} independent rows")
        for sub in v.subsets:
            if len(sub) != relax.n or rank(a.select(sub)) != relax.n:
                raise AssertionError(f"witnessing subset {sub} is not a basis")


# ---------------------------------------------------------------- verdicts

@dataclass
class Ideal:
    report: VertexReport
    relaxation: Relaxation
    ideal = True


@dataclass
class NotIdeal:
    witness: FractionalWitness
    report: VertexReport
    relaxation: Relaxation
    ideal = False


def _witness_key(w: FractionalWitness):
    # larger penalty first, then more tight rows, then earlier tight rows, then smaller point
    return (-w.phi_value, -len(w.tight_all), w.tight_all, w.point.z)


def select_witness(fractional: Sequence[FractionalWitness]) -> FractionalWitness:
    return min(fractional, key=_witness_key)


def check_ideal(m: MblpModel | Relaxation, workers: int = 1, var_cap: int = DEFAULT_VAR_CAP):
    relax = m if isinstance(m, Relaxation) else compose_relaxation(m)
    report = enumerate_extreme_points(relax, workers=workers, var_cap=var_cap)
    if not report.vertices:
        raise EmptyRelaxation("the relaxation has no extreme point")
    if not report.bounded:
        raise UnboundedRelaxation("the relaxation has a recession direction")
    if not report.fractional:
        return Ideal(report, relax)
    return NotIdeal(select_witness(report.fractional), report, relax)


def max_phi_over_vertices(m: MblpModel | Relaxation, workers: int = 1) -> Fraction:
    relax = m if isinstance(m, Relaxation) else compose_relaxation(m)
    report = enumerate_extreme_points(relax, workers=workers)
    if not report.vertices:
        raise EmptyRelaxation("the relaxation has no extreme point")
    return max((Phi(v.point.y) for v in report.vertices), default=Fraction(0))


# ---------------------------------------------------------------- circuits

@dataclass(frozen=True)
class Circuit:
    rows: tuple[int, ...]
    multipliers: tuple[Fraction, ...]


def spark_circuits(t: RatMatrix | Sequence[Sequence], row_cap: int = 24) -> list[Circuit]:
    """Every minimal dependent row subset, smallest first."""
    if not isinstance(t, RatMatrix):
        t = RatMatrix(t)
    if t.rows > row_cap:
        raise RowCapExceeded(f"{t.rows} rows exceeds the cap of {row_cap}")
    full = rank(t)
    out: list[Circuit] = []
    found_sets: list[frozenset] = []
    for size in range(1, min(t.rows, full + 1) + 1):
        for sub in combinations(range(t.rows), size):
            s = frozenset(sub)
            if any(c <= s for c in found_sets):
                continue
            block = t.select(sub)
            if rank(block) == size - 1:
                null = left_nullspace(block)
                mult = null[0]
                if all(v != 0 for v in mult):
                    out.append(Circuit(tuple(sub), mult))
                    found_sets.append(s)
    return out


def spark(t) -> int | None:
    circuits = spark_circuits(t)
    return min((len(c.rows) for c in circuits), default=None)


# ---------------------------------------------------------------- exportable models

@dataclass
class IomModel:
    inner: Relaxation
    iom: MblpModel
    covers: list
    big_m: Fraction


def augmented(relax: Relaxation, rows: Sequence[int]) -> RatMatrix:
    return RatMatrix([list(relax.rows[i].coeffs) + [relax.rows[i].rhs] for i in rows])


def build_iom(m: MblpModel | Relaxation, covers: Sequence[Sequence[int]] = (), big_m=10) -> IomModel:
    """Fixed-data model whose optimum is the largest penalty over vertices.

    Variables: inner x, inner y (continuous here), phi per binary, then one
    binary eta per inner inequality row.  Equalities get no eta and are
    subtracted from the basis-size row and from each cover's rank.
    """
    relax = m if isinstance(m, Relaxation) else compose_relaxation(m)
    big_m = Fraction(big_m)
    if big_m <= 0:
        raise ValueError("big-M must be positive")
    n_c, n_b, n = relax.n_c, relax.n_b, relax.n
    ineq = [i for i, row in enumerate(relax.rows) if row.sense != EQ]
    n_eq = relax.equality_count
    names = (list(relax.model.var_names) + [f"phi_{v}" for v in relax.model.var_names[n_c:]]
             + [f"eta_{relax.rows[i].tag.ident()}" for i in ineq])
    cont = n + n_b
    width = cont + len(ineq)
    rows: list[ConstraintRow] = []

    def vec(entries: dict):
        out = [Fraction(0)] * width
        for q, a in entries.items():
            out[q] += a
        return out

    for k in range(n_b):
        y, ph = n_c + k, n + k
        rows.append(make_row(vec({y: 2, ph: -1}), 0, GE, ConstraintTag("IOM:a", (names[y],))))
    for k in range(n_b):
        y, ph = n_c + k, n + k
        rows.append(make_row(vec({y: -2, ph: -1}), -2, GE, ConstraintTag("IOM:b", (names[y],))))
    for row in relax.rows:
        rows.append(make_row(list(row.coeffs) + [0] * (width - n), row.rhs, row.sense,
                             ConstraintTag("IOM:c", (row.tag.label(),))))
    for e, i in enumerate(ineq):
        row = relax.rows[i]
        # A z <= b + M (1 - eta)
        entries = {q: -a for q, a in enumerate(row.coeffs) if a}
        entries[cont + e] = -big_m
        rows.append(make_row(vec(entries), -row.rhs - big_m, GE, ConstraintTag("IOM:d", (row.tag.label(),))))
    rows.append(make_row(vec({cont + e: 1 for e in range(len(ineq))}), n - n_eq, EQ, ConstraintTag("IOM:e")))
    pos = {i: e for e, i in enumerate(ineq)}
    installed = []
    for c_idx, cover in enumerate(covers):
        cover = tuple(sorted(set(cover)))
        rk = rank(augmented(relax, cover))
        eqs = sum(1 for i in cover if relax.rows[i].sense == EQ)
        entries = {cont + pos[i]: -1 for i in cover if i in pos}
        rows.append(make_row(vec(entries), -(rk - eqs), GE, ConstraintTag("IOM:f", (c_idx,))))
        installed.append(cover)
    objective = tuple(Fraction(1) if n <= q < cont else Fraction(0) for q in range(width))
    iom = MblpModel(cont, len(ineq), rows, names, objective=objective, maximize=True, name="IOM")
    return IomModel(relax, iom, installed, big_m)


@dataclass
class SeparationModel:
    milp: MblpModel
    big_m: Fraction


def build_separation(t_aug: RatMatrix | Sequence[Sequence], big_m) -> SeparationModel:
    """Smallest-support multiplier search over the rows of ``t_aug``.

    Besides the activation rows, one row asks for at least one active
    multiplier so the zero vector is excluded.
    """
    if not isinstance(t_aug, RatMatrix):
        t_aug = RatMatrix(t_aug)
    t = t_aug.rows
    if t == 0:
        raise ValueError("the tight subset must not be empty")
    big_m = Fraction(big_m)
    if big_m <= 0:
        raise ValueError("big-M must be positive")
    names = [f"p_{i}" for i in range(t)] + [f"mu_{i}" for i in range(t)] + [f"nu_{i}" for i in range(t)]
    width = 3 * t
    rows = []

    def vec(entries):
        out = [Fraction(0)] * width
        for q, a in entries.items():
            out[q] += a
        return out

    for col in range(t_aug.cols):
        rows.append(make_row(vec({i: t_aug[i, col] for i in range(t) if t_aug[i, col]}), 0, EQ,
                             ConstraintTag("SEP:null", (col,))))
    for i in range(t):
        p, mu, nu = i, t + i, 2 * t + i
        rows.append(make_row(vec({p: 1, mu: -(big_m + 1)}), -big_m, GE, ConstraintTag("SEP:mu_lo", (i,))))
        rows.append(make_row(vec({p: -1, mu: big_m}), 0, GE, ConstraintTag("SEP:mu_hi", (i,))))
        rows.append(make_row(vec({p: 1, nu: big_m}), 0, GE, ConstraintTag("SEP:nu_lo", (i,))))
        rows.append(make_row(vec({p: -1, nu: -(big_m + 1)}), -big_m, GE, ConstraintTag("SEP:nu_hi", (i,))))
    rows.append(make_row(vec({q: 1 for q in range(t, 3 * t)}), 1, GE, ConstraintTag("SEP:nonzero")))
    objective = tuple(Fraction(0) if q < t else Fraction(1) for q in range(width))
    milp = MblpModel(t, 2 * t, rows, names, objective=objective, maximize=False, name="SEP")
    return SeparationModel(milp, big_m)


def _ceil_log2(v: Fraction) -> int:
    # smallest k with 2^k >= v, for v > 0
    k = 0
    while Fraction(2) ** k < v:
        k += 1
    while k > 0 and Fraction(2) ** (k - 1) >= v:
        k -= 1
    return k


def big_m_bound(m: MblpModel | Relaxation | None = None, override=None, n_vars: int | None = None,
                a_max=None) -> Fraction:
    """Power-of-two bound on the separation multipliers, or the override."""
    if override is not None:
        return Fraction(override)
    if m is not None:
        model = m.model if isinstance(m, Relaxation) else m
        n_vars = model.n
        a_max = max((abs(a) for row in model.rows for a in row.coeffs), default=Fraction(0))
    a_max = Fraction(a_max)
    if a_max < 1:
        raise ValueError("the largest coefficient magnitude must be at least 1")
    n = n_vars
    return Fraction(2) ** (4 * n ** 3 * n * _ceil_log2(a_max + 2))


def slack_bound(relax: Relaxation, report: VertexReport | None = None) -> Fraction:
    """Largest row slack over the vertices; a valid big-M for the tightness rows."""
    if report is None:
        report = enumerate_extreme_points(relax)
    best = Fraction(1)
    for v in report.vertices:
        for row in relax.rows:
            best = max(best, row.residual(v.point.z))
    return best
