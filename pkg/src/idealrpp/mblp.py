"""Mixed-binary linear feasibility systems.

A model is ``A [x; y] (>= or =) b`` with the continuous block ``x`` first and
the binary block ``y`` last.  Rows are always stored with sense ``>=`` or
``=``; ``<=`` input is negated on the way in.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .rational import as_rat, rat_str

GE = ">="
EQ = "="
LE = "<="


class InfeasiblePoint(ValueError):
    pass


class OutOfBox(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintTag:
    family: str
    realization: tuple = ()

    def label(self) -> str:
        if not self.realization:
            return self.family
        return f"{self.family}[{','.join(str(v) for v in self.realization)}]"

    def ident(self) -> str:
        """Identifier usable as an LP/MPS row name."""
        parts = [self.family.replace(":", "_").replace("-", "m").replace("+", "p")]
        parts += [str(v) for v in self.realization]
        return "_".join(parts).replace("/", "_")

    def to_json(self):
        return {"family": self.family, "realization": list(self.realization)}

    @staticmethod
    def from_json(obj) -> "ConstraintTag":
        return ConstraintTag(obj["family"], tuple(obj.get("realization", ())))


@dataclass(frozen=True)
class ConstraintRow:
    coeffs: tuple[Fraction, ...]
    rhs: Fraction
    sense: str
    tag: ConstraintTag

    def __post_init__(self):
        if self.sense not in (GE, EQ):
            raise ValueError(f"row sense must be >= or =, got {self.sense!r}")

    def value(self, z: Sequence[Fraction]) -> Fraction:
        return sum((a * v for a, v in zip(self.coeffs, z) if a), Fraction(0))

    def residual(self, z: Sequence[Fraction]) -> Fraction:
        return self.value(z) - self.rhs


def make_row(coeffs: Sequence, rhs, sense: str, tag: ConstraintTag) -> ConstraintRow:
    """Build a row, negating ``<=`` input so only ``>=`` and ``=`` are stored."""
    c = tuple(as_rat(v) for v in coeffs)
    r = as_rat(rhs)
    if sense == LE:
        return ConstraintRow(tuple(-v for v in c), -r, GE, tag)
    return ConstraintRow(c, r, sense, tag)


@dataclass(frozen=True)
class Point:
    x: tuple[Fraction, ...]
    y: tuple[Fraction, ...]

    @property
    def z(self) -> tuple[Fraction, ...]:
        return self.x + self.y

    @staticmethod
    def split(z: Sequence, n_c: int) -> "Point":
        z = tuple(as_rat(v) for v in z)
        return Point(z[:n_c], z[n_c:])

    def to_json(self):
        return {"x": [rat_str(v) for v in self.x], "y": [rat_str(v) for v in self.y]}


@dataclass
class MblpModel:
    n_c: int
    n_b: int
    rows: list[ConstraintRow]
    var_names: list[str]
    objective: tuple[Fraction, ...] | None = None
    maximize: bool = False
    name: str = "model"

    def __post_init__(self):
        n = self.n_c + self.n_b
        if self.n_b < 0 or self.n_c < 0:
            raise ValueError("variable counts must be non-negative")
        if len(self.var_names) != n:
            raise ValueError("one name per variable is required")
        if len(set(self.var_names)) != n:
            raise ValueError("variable names must be unique")
        seen = set()
        for row in self.rows:
            if len(row.coeffs) != n:
                raise ValueError(f"row {row.tag.label()} has width {len(row.coeffs)}, expected {n}")
            if row.tag in seen:
                raise ValueError(f"duplicate tag {row.tag.label()}")
            seen.add(row.tag)
        if self.objective is not None and len(self.objective) != n:
            raise ValueError("objective width mismatch")

    @property
    def n(self) -> int:
        return self.n_c + self.n_b

    def index(self, name: str) -> int:
        return self.var_names.index(name)

    def row_by_tag(self, tag: ConstraintTag) -> int:
        for i, row in enumerate(self.rows):
            if row.tag == tag:
                return i
        raise KeyError(tag.label())

    def equality_count(self) -> int:
        return sum(1 for r in self.rows if r.sense == EQ)

    def with_rows(self, extra: Iterable[ConstraintRow]) -> "MblpModel":
        return MblpModel(self.n_c, self.n_b, list(self.rows) + list(extra), list(self.var_names),
                         self.objective, self.maximize, self.name)

    # JSON interchange
    def to_json(self) -> dict:
        out = {
            "n_c": self.n_c,
            "n_b": self.n_b,
            "var_names": list(self.var_names),
            "rows": [
                {
                    "coeffs": [rat_str(v) for v in r.coeffs],
                    "rhs": rat_str(r.rhs),
                    "sense": r.sense,
                    "tag": r.tag.to_json(),
                }
                for r in self.rows
            ],
        }
        if self.objective is not None:
            out["objective"] = {"sense": "max" if self.maximize else "min",
                                "coeffs": [rat_str(v) for v in self.objective]}
        out["name"] = self.name
        return out

    @staticmethod
    def from_json(obj: dict) -> "MblpModel":
        n = obj["n_c"] + obj["n_b"]
        names = obj.get("var_names") or [f"x{i}" for i in range(obj["n_c"])] + [f"y{i}" for i in range(obj["n_b"])]
        rows = []
        for k, r in enumerate(obj["rows"]):
            tag = ConstraintTag.from_json(r["tag"]) if isinstance(r.get("tag"), dict) else ConstraintTag(str(r.get("tag", f"row{k}")))
            rows.append(make_row(r["coeffs"], r["rhs"], r["sense"], tag))
        objective = None
        maximize = False
        if "objective" in obj:
            objective = tuple(as_rat(v) for v in obj["objective"]["coeffs"])
            maximize = obj["objective"]["sense"] == "max"
        if any(len(r.coeffs) != n for r in rows):
            raise ValueError("row width mismatch in model JSON")
        return MblpModel(obj["n_c"], obj["n_b"], rows, names, objective, maximize, obj.get("name", "model"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


@dataclass(frozen=True)
class DroppedBound:
    var: int
    side: str  # "lower" or "upper"
    dominated_by: ConstraintTag


@dataclass
class Relaxation:
    model: MblpModel
    dropped_bounds: list[DroppedBound] = field(default_factory=list)

    @property
    def rows(self) -> list[ConstraintRow]:
        return self.model.rows

    @property
    def n_c(self) -> int:
        return self.model.n_c

    @property
    def n_b(self) -> int:
        return self.model.n_b

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def equality_count(self) -> int:
        return self.model.equality_count()

    def row_by_tag(self, tag: ConstraintTag) -> int:
        return self.model.row_by_tag(tag)


LOWER_FAMILY = "db-"
UPPER_FAMILY = "db+"


def _implied_bound(row: ConstraintRow, var: int, side: str, n_c: int, box: dict) -> bool:
    """Does ``row`` alone, with the remaining binary box bounds, imply the bound?

    ``box`` maps a binary index to the (lower, upper) bounds still present;
    a side that is missing counts as unbounded.  Continuous variables are
    always treated as free.
    """
    senses = [1, -1] if row.sense == EQ else [1]
    for sgn in senses:
        coeffs = [sgn * a for a in row.coeffs]
        rhs = sgn * row.rhs
        a = coeffs[var]
        if side == "upper" and a >= 0:
            continue
        if side == "lower" and a <= 0:
            continue
        # a*y_var >= rhs - sum_{j != var} coeffs_j z_j ; need the worst case of the sum
        best = Fraction(0)
        ok = True
        for j, c in enumerate(coeffs):
            if j == var or c == 0:
                continue
            if j < n_c:
                ok = False
                break
            lo, hi = box[j]
            bound = hi if c > 0 else lo
            if bound is None:
                ok = False
                break
            best += c * bound
        if not ok:
            continue
        if side == "upper":
            # y_var <= (best - rhs) / (-a)
            if (best - rhs) / (-a) <= 1:
                return True
        else:
            # y_var >= (rhs - best) / a
            if (rhs - best) / a >= 0:
                return True
    return False


def compose_relaxation(m: MblpModel) -> Relaxation:
    """Drop integrality, fold the binary box bounds in as rows.

    A bound is left out only when a single body row, together with box
    bounds on the other binaries that are still present, implies it.
    Bounds are examined in variable order, lower before upper, so no two
    bounds can be dropped by leaning on each other.
    """
    box = {m.n_c + k: [Fraction(0), Fraction(1)] for k in range(m.n_b)}
    dropped: list[DroppedBound] = []
    for k in range(m.n_b):
        var = m.n_c + k
        for side in ("lower", "upper"):
            for row in m.rows:
                probe = {j: (None, None) if j == var else tuple(b) for j, b in box.items()}
                if _implied_bound(row, var, side, m.n_c, probe):
                    dropped.append(DroppedBound(var, side, row.tag))
                    box[var][0 if side == "lower" else 1] = None
                    break
    rows = list(m.rows)
    n = m.n
    for k in range(m.n_b):
        var = m.n_c + k
        if box[var][0] is not None:
            coeffs = [0] * n
            coeffs[var] = 1
            rows.append(make_row(coeffs, 0, GE, ConstraintTag(LOWER_FAMILY, (m.var_names[var],))))
    for k in range(m.n_b):
        var = m.n_c + k
        if box[var][1] is not None:
            coeffs = [0] * n
            coeffs[var] = -1
            rows.append(make_row(coeffs, -1, GE, ConstraintTag(UPPER_FAMILY, (m.var_names[var],))))
    relaxed = MblpModel(m.n_c, m.n_b, rows, list(m.var_names), m.objective, m.maximize, m.name)
    return Relaxation(relaxed, dropped)


def _z_of(p, n: int) -> tuple[Fraction, ...]:
    z = p.z if isinstance(p, Point) else tuple(as_rat(v) for v in p)
    if len(z) != n:
        raise ValueError(f"point has {len(z)} coordinates, expected {n}")
    return z


def residuals(r: Relaxation | MblpModel, p) -> tuple[Fraction, ...]:
    model = r.model if isinstance(r, Relaxation) else r
    z = _z_of(p, model.n)
    return tuple(row.residual(z) for row in model.rows)


def is_feasible(r: Relaxation | MblpModel, p) -> bool:
    model = r.model if isinstance(r, Relaxation) else r
    for row, res in zip(model.rows, residuals(model, p)):
        if res < 0 or (row.sense == EQ and res != 0):
            return False
    return True


def tight_rows(r: Relaxation | MblpModel, p) -> frozenset[int]:
    model = r.model if isinstance(r, Relaxation) else r
    res = residuals(model, p)
    out = set()
    for i, (row, v) in enumerate(zip(model.rows, res)):
        if v < 0 or (row.sense == EQ and v != 0):
            raise InfeasiblePoint(f"row {row.tag.label()} violated by {v}")
        if v == 0:
            out.add(i)
    return frozenset(out)


def phi(y) -> Fraction:
    y = as_rat(y)
    if y < 0 or y > 1:
        raise OutOfBox(f"{y} outside [0, 1]")
    return 1 - abs(2 * y - 1)


def Phi(ys: Iterable) -> Fraction:
    return sum((phi(v) for v in ys), Fraction(0))
