"""Strip-packing harness: instance generation, greedy layouts, model export and run summaries."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from itertools import combinations, product
from math import lcm
from typing import Sequence

import numpy as np

from .formulations import (BINARY, UNARY, bname, build, cname, dname, normalize_kind, sequence_pair_cuts,
                           branching_priority, uname)
from .mblp import EQ, GE, ConstraintTag, MblpModel, is_feasible, make_row
from .rational import as_rat, rat_str
from .rpp import DIRS, RppInstance, RppObject, TrivialInstance, classify, derive_params, pair_terms
from .selectors import code_for


class ObjectTooWide(ValueError):
    pass


# ---------------------------------------------------------------- generation

def beta25_cdf(x: Fraction) -> Fraction:
    """Exact distribution function of Beta(2, 5)."""
    return 1 - (1 - x) ** 6 - 6 * x * (1 - x) ** 5


CDF_KNOTS = 20
_XS = [Fraction(k, CDF_KNOTS) for k in range(CDF_KNOTS + 1)]
_FS = [beta25_cdf(x) for x in _XS]


def beta25_quantile(u: Fraction) -> Fraction:
    """Piecewise-linear inverse of the tabulated distribution function."""
    u = as_rat(u)
    if not 0 <= u <= 1:
        raise ValueError("quantile level must lie in [0, 1]")
    for k in range(CDF_KNOTS):
        lo, hi = _FS[k], _FS[k + 1]
        if u <= hi:
            return _XS[k] + (u - lo) / (hi - lo) * (_XS[k + 1] - _XS[k])
    return Fraction(1)


def _round_half_up(v: Fraction) -> int:
    return int((v + Fraction(1, 2)) // 1)


@dataclass(frozen=True)
class GenSpec:
    n_objects: int
    strip_width: Fraction = Fraction(100)
    size_range: tuple = (5, 30)
    beta_params: tuple = (2, 5)
    clearance_prob: Fraction = Fraction(1, 2)
    seed: int = 0
    n_instances: int = 1

    def __post_init__(self):
        object.__setattr__(self, "strip_width", as_rat(self.strip_width))
        object.__setattr__(self, "size_range", tuple(as_rat(v) for v in self.size_range))
        object.__setattr__(self, "clearance_prob", as_rat(self.clearance_prob))
        lo, hi = self.size_range
        if self.n_objects < 1 or self.n_instances < 1:
            raise ValueError("need at least one object and one instance")
        if not (0 < lo <= hi <= self.strip_width):
            raise ValueError("size range must lie within (0, strip width]")
        if tuple(self.beta_params) != (2, 5):
            raise ValueError("only the Beta(2, 5) shape is tabulated")
        if not 0 <= self.clearance_prob <= 1:
            raise ValueError("clearance probability must lie in [0, 1]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


_U_BITS = 53


def _stream(seed: int, index: int) -> np.random.Generator:
    # counter-based: the stream of instance k never depends on other instances
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def _uniform(rng: np.random.Generator) -> Fraction:
    return Fraction(int(rng.integers(0, 2 ** _U_BITS)), 2 ** _U_BITS)


def generate_one(spec: GenSpec, index: int) -> RppInstance:
    rng = _stream(spec.seed, index)
    lo, hi = spec.size_range
    objs = []
    for _ in range(spec.n_objects):
        d = tuple(Fraction(_round_half_up(lo + (hi - lo) * beta25_quantile(_uniform(rng)))) for _ in DIRS)
        sigma = []
        for side in range(4):
            parent = d[side % 2]
            if _uniform(rng) < spec.clearance_prob:
                sigma.append(Fraction(_round_half_up(_uniform(rng) * parent * 100), 100))
            else:
                sigma.append(Fraction(0))
        objs.append(RppObject(d, tuple(sigma)))
    height = sum((o.extent("y") for o in objs), Fraction(0))
    return RppInstance((spec.strip_width, height), tuple(objs))


def generate(spec: GenSpec) -> list[RppInstance]:
    return [generate_one(spec, k) for k in range(spec.n_instances)]


# ---------------------------------------------------------------- layouts

@dataclass(frozen=True)
class Violation:
    kind: str            # "bounds" or "overlap"
    objects: tuple
    direction: str | None
    detail: str


def _holds(prm, centers, k, l, s) -> bool:
    ax = DIRS.index(s)
    return centers[k][ax] + prm.P[(k, l, s)] <= centers[l][ax]


def validate_layout(inst: RppInstance, centers: Sequence) -> list[Violation]:
    """Empty when every center is in range and every pair is separated along some direction."""
    if len(centers) != inst.n:
        raise ValueError("one center per object is required")
    centers = [tuple(as_rat(v) for v in c) for c in centers]
    prm = derive_params(inst)
    out = []
    for i in range(inst.n):
        for ax, s in enumerate(DIRS):
            v = centers[i][ax]
            if v < prm.LB[(i, s)] or v > prm.UB[(i, s)]:
                out.append(Violation("bounds", (i + 1,), s,
                                     f"c_{i + 1}{s} = {rat_str(v)} outside "
                                     f"[{rat_str(prm.LB[(i, s)])}, {rat_str(prm.UB[(i, s)])}]"))
    for i, j in combinations(range(inst.n), 2):
        if not any(_holds(prm, centers, k, l, s) for (k, l, s) in pair_terms(i, j)):
            out.append(Violation("overlap", (i + 1, j + 1), None,
                                 f"objects {i + 1} and {j + 1} overlap or occlude a clearance"))
    return out


@dataclass(frozen=True)
class RowRecord:
    base: Fraction          # lowest physical bottom allowed in the row
    top_physical: Fraction
    top_clearance: Fraction
    members: tuple


@dataclass(frozen=True)
class GreedyLayout:
    centers: tuple
    rows: tuple
    height: Fraction

    def to_json(self) -> dict:
        return {
            "centers": [[rat_str(v) for v in c] for c in self.centers],
            "rows": [{"base": rat_str(r.base), "top_physical": rat_str(r.top_physical),
                      "top_clearance": rat_str(r.top_clearance), "members": [m + 1 for m in r.members]}
                     for r in self.rows],
            "height": rat_str(self.height),
        }


def layout_height(inst: RppInstance, centers) -> Fraction:
    return max((as_rat(c[1]) + o.d[1] / 2 + o.sigma_plus("y") for o, c in zip(inst.objects, centers)),
               default=Fraction(0))


def greedy_pack(inst: RppInstance) -> GreedyLayout:
    """Shelf packing by increasing height, left to right, rows stacked without occlusion."""
    prm = derive_params(inst)
    for i, o in enumerate(inst.objects):
        if o.extent("x") > inst.r("x"):
            raise ObjectTooWide(f"object {i + 1} needs {rat_str(o.extent('x'))} of width {rat_str(inst.r('x'))}")
    order = sorted(range(inst.n), key=lambda i: (inst.objects[i].extent("y"), i))
    centers: dict = {}
    rows: list[RowRecord] = []
    floor_phys = floor_clear = Fraction(0)
    current: list[int] = []

    def y_center(i):
        o = inst.objects[i]
        bottom = max(floor_clear, floor_phys + o.sigma_minus("y"), o.sigma_minus("y"))
        return bottom + o.d[1] / 2

    def close_row():
        nonlocal floor_phys, floor_clear
        tops_p = [centers[i][1] + inst.objects[i].d[1] / 2 for i in current]
        tops_c = [t + inst.objects[i].sigma_plus("y") for t, i in zip(tops_p, current)]
        rows.append(RowRecord(max(floor_clear, floor_phys), max(tops_p), max(tops_c), tuple(current)))
        floor_phys, floor_clear = max(tops_p), max(tops_c)

    for i in order:
        cx = prm.LB[(i, "x")]
        for k in current:
            cx = max(cx, centers[k][0] + prm.P[(k, i, "x")])
        if current and cx > prm.UB[(i, "x")]:
            close_row()
            current = []
            cx = prm.LB[(i, "x")]
        centers[i] = (cx, y_center(i))
        current.append(i)
    if current:
        close_row()
    cs = tuple(centers[i] for i in range(inst.n))
    height = layout_height(inst, cs)
    bad = validate_layout(inst.with_region(ry=max(height, inst.r("y"))), cs)
    if bad:
        raise AssertionError(f"greedy layout invalid: {bad[0].detail}")
    return GreedyLayout(cs, tuple(rows), height)


# ---------------------------------------------------------------- strip packing

@dataclass
class SolverExport:
    model_text: str
    hints: dict
    format: str = "lp"

    def hints_json(self) -> str:
        return json.dumps(self.hints, indent=1, sort_keys=True)


CUTS = ("none", "spu", "spb")


def binaries_for_layout(kind: str, inst: RppInstance, centers) -> dict:
    """Indicator values of a layout.

    Kinds with a single active term per pair take the first separating term
    in the fixed order.  The refined kinds read both indicators of a
    direction as a three-way state, so there every term that holds is set.
    """
    kind = normalize_kind(kind)
    prm = derive_params(inst)
    centers = [tuple(as_rat(v) for v in c) for c in centers]
    out: dict = {}
    for i, j in combinations(range(inst.n), 2):
        term = next((t for t in pair_terms(i, j) if _holds(prm, centers, *t)), None)
        if term is None:
            raise ValueError(f"objects {i + 1} and {j + 1} are not separated")
        if kind in ("RU", "HU"):
            for t in pair_terms(i, j):
                out[uname(*t)] = Fraction(int(_holds(prm, centers, *t)))
        elif kind in UNARY:
            for t in pair_terms(i, j):
                out[uname(*t)] = Fraction(int(t == term))
        else:
            a, b = code_for(i, j, term)
            out[bname(i, j)] = Fraction(a)
            out[bname(j, i)] = Fraction(b)
            if kind == "SBM":
                out[dname(i, j)] = Fraction(a * b)
    return out


def layout_point(kind: str, inst: RppInstance, centers, m: MblpModel) -> list[Fraction]:
    vals = binaries_for_layout(kind, inst, centers)
    for i, c in enumerate(centers):
        for ax, s in enumerate(DIRS):
            vals[cname(i, s)] = as_rat(c[ax])
    if "h" in m.var_names:
        vals["h"] = layout_height(inst, centers)
    return [vals[name] for name in m.var_names]


def build_spp(inst: RppInstance, kind: str, cuts: str = "none", priorities: bool = False,
              warm: bool = False, fmt: str = "lp") -> tuple[MblpModel, SolverExport]:
    """Minimize the strip height ``h``; the region height is capped at the greedy height."""
    kind = normalize_kind(kind)
    if cuts not in CUTS:
        raise ValueError(f"cuts must be one of {', '.join(CUTS)}")
    if cuts == "spu" and kind not in UNARY or cuts == "spb" and kind not in BINARY:
        raise ValueError(f"{cuts} cuts do not apply to {kind}")
    cls = classify(inst)
    if cls.trivial:
        raise TrivialInstance("; ".join(cls.reasons))
    layout = greedy_pack(inst)
    capped = inst.with_region(ry=layout.height)
    base = build(kind, capped, force=True, spp=True)
    names = base.var_names
    prm = derive_params(capped)
    rows = list(base.rows)
    width = base.n
    hpos = names.index("h")

    def vec(entries):
        out = [Fraction(0)] * width
        for name, a in entries.items():
            out[names.index(name)] += a
        return out

    for i, o in enumerate(capped.objects):
        rows.append(make_row(vec({"h": 1, cname(i, "y"): -1}), o.d[1] / 2 + o.sigma_plus("y"), GE,
                             ConstraintTag("SPP:h", (i + 1,))))
    present = {r.tag.family.split(":")[-1] for r in base.rows}
    if "cmin" not in present:
        for i in range(capped.n):
            for s in DIRS:
                rows.append(make_row(vec({cname(i, s): 1}), prm.LB[(i, s)], GE, ConstraintTag("SPP:cmin", (i + 1, s))))
                rows.append(make_row(vec({cname(i, s): -1}), -prm.UB[(i, s)], GE,
                                     ConstraintTag("SPP:cmax", (i + 1, s))))
    rows.append(make_row(vec({"h": -1}), -layout.height, GE, ConstraintTag("SPP:hmax")))
    if cuts != "none" and capped.n >= 3:
        rows += sequence_pair_cuts(kind, capped.n, names)
    objective = tuple(Fraction(int(q == hpos)) for q in range(width))
    m = MblpModel(base.n_c, base.n_b, rows, list(names), objective=objective, maximize=False,
                  name=f"SPP-{kind}-{capped.n}")
    hints: dict = {"bound_ry": rat_str(layout.height)}
    if priorities:
        hints["priorities"] = branching_priority(kind, capped)
    if warm:
        start = layout_point(kind, capped, layout.centers, m)
        if not is_feasible(m, start):
            raise AssertionError("warm start is not feasible for the strip-packing model")
        hints["start"] = {name: rat_str(v) for name, v in zip(names, start)}
    return m, SolverExport(export(m, fmt), hints, fmt)


def spp_optimum_bruteforce(inst: RppInstance) -> Fraction | None:
    """Least strip height over every choice of one separating term per pair.

    Each choice fixes a set of difference constraints per direction; the
    smallest solution is the longest-path one from the lower bounds.
    """
    prm = derive_params(inst)
    n = inst.n
    pairs = list(combinations(range(n), 2))
    best = None
    for choice in product(range(4), repeat=len(pairs)):
        arcs = {s: [] for s in DIRS}
        for (i, j), c in zip(pairs, choice):
            k, l, s = pair_terms(i, j)[c]
            arcs[s].append((k, l, prm.P[(k, l, s)]))
        low = {}
        ok = True
        for s in DIRS:
            v = [prm.LB[(i, s)] for i in range(n)]
            for _ in range(n):
                for k, l, p in arcs[s]:
                    if v[k] + p > v[l]:
                        v[l] = v[k] + p
            if any(v[k] + p > v[l] for k, l, p in arcs[s]):
                ok = False  # positive cycle
                break
            low[s] = v
        if not ok or any(low["x"][i] > prm.UB[(i, "x")] for i in range(n)):
            continue
        h = max(low["y"][i] + inst.objects[i].d[1] / 2 + inst.objects[i].sigma_plus("y") for i in range(n))
        if best is None or h < best:
            best = h
    return best


# ---------------------------------------------------------------- export

class NonRepresentable(ValueError):
    pass


def _terminates(v: Fraction) -> bool:
    d = v.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def fmt_number(v: Fraction) -> str:
    v = as_rat(v)
    if v.denominator == 1:
        return str(v.numerator)
    if not _terminates(v):
        raise NonRepresentable(rat_str(v))
    text = format(Decimal(v.numerator) / Decimal(v.denominator), "f")
    return text.rstrip("0").rstrip(".") if "." in text else text


def _scale(values: Sequence[Fraction]) -> int:
    """1 when all values print as exact decimals, else the LCM of the denominators."""
    if all(_terminates(v) for v in values):
        return 1
    return lcm(*(v.denominator for v in values))


def _row_names(m: MblpModel) -> list[str]:
    names, seen = [], {}
    for row in m.rows:
        base = row.tag.ident()
        k = seen.get(base, 0)
        seen[base] = k + 1
        names.append(base if k == 0 else f"{base}_{k}")
    return names


def _lp_expr(coeffs, names) -> str:
    parts = []
    for a, name in zip(coeffs, names):
        if a == 0:
            continue
        sign = "-" if a < 0 else "+"
        mag = fmt_number(abs(a))
        parts.append(f"{sign} {mag} {name}")
    if not parts:
        return f"0 {names[0]}"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def export(m: MblpModel, fmt: str = "lp") -> str:
    """Deterministic LP or MPS text; rows whose data do not terminate in decimal are scaled."""
    fmt = fmt.lower()
    if fmt == "lp":
        return _export_lp(m)
    if fmt == "mps":
        return _export_mps(m)
    raise ValueError("format must be lp or mps")


def _scaled_rows(m: MblpModel):
    out = []
    for name, row in zip(_row_names(m), m.rows):
        f = _scale(list(row.coeffs) + [row.rhs])
        out.append((name, row, f, [a * f for a in row.coeffs], row.rhs * f))
    return out


def _objective(m: MblpModel):
    obj = m.objective if m.objective is not None else tuple(Fraction(0) for _ in range(m.n))
    f = _scale(list(obj))
    return f, [a * f for a in obj]


def _export_lp(m: MblpModel) -> str:
    names = m.var_names
    lines = [f"\\ {m.name}"]
    rows = _scaled_rows(m)
    f_obj, obj = _objective(m)
    if f_obj != 1:
        lines.append(f"\\ objective scaled by {f_obj}")
    for name, _, f, _, _ in rows:
        if f != 1:
            lines.append(f"\\ row {name} scaled by {f}")
    lines.append("Maximize" if m.maximize else "Minimize")
    lines.append(f" obj: {_lp_expr(obj, names)}")
    lines.append("Subject To")
    for name, row, _, coeffs, rhs in rows:
        op = "=" if row.sense == EQ else ">="
        lines.append(f" {name}: {_lp_expr(coeffs, names)} {op} {fmt_number(rhs)}")
    lines.append("Bounds")
    for v in names[:m.n_c]:
        lines.append(f" {v} free")
    for v in names[m.n_c:]:
        lines.append(f" 0 <= {v} <= 1")
    if m.n_b:
        lines.append("Binaries")
        for v in names[m.n_c:]:
            lines.append(f" {v}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def _export_mps(m: MblpModel) -> str:
    names = m.var_names
    rows = _scaled_rows(m)
    f_obj, obj = _objective(m)
    lines = [f"* {m.name}"]
    if f_obj != 1:
        lines.append(f"* objective scaled by {f_obj}")
    for name, _, f, _, _ in rows:
        if f != 1:
            lines.append(f"* row {name} scaled by {f}")
    lines += [f"NAME {m.name}", "OBJSENSE", "    MAX" if m.maximize else "    MIN", "ROWS", " N  obj"]
    for name, row, _, _, _ in rows:
        lines.append(f" {'E' if row.sense == EQ else 'G'}  {name}")
    lines.append("COLUMNS")
    for q, v in enumerate(names):
        if obj[q]:
            lines.append(f"    {v} obj {fmt_number(obj[q])}")
        for name, _, _, coeffs, _ in rows:
            if coeffs[q]:
                lines.append(f"    {v} {name} {fmt_number(coeffs[q])}")
    lines.append("RHS")
    for name, _, _, _, rhs in rows:
        if rhs:
            lines.append(f"    RHS {name} {fmt_number(rhs)}")
    lines.append("BOUNDS")
    for v in names[:m.n_c]:
        lines.append(f" FR BND {v}")
    for v in names[m.n_c:]:
        lines.append(f" BV BND {v}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- run summaries

@dataclass
class RunRecord:
    formulation: str
    n: int
    flags: dict = field(default_factory=dict)
    runtime: float | None = None
    gap: float | None = None
    nodes: int | None = None
    solutions: int | None = None

    def __post_init__(self):
        if (self.runtime is None) == (self.gap is None):
            raise ValueError("a run has either a runtime or a gap")
        if self.gap is not None and self.gap < 0:
            raise ValueError("gap must be non-negative")
        if self.runtime is not None and self.runtime < 0:
            raise ValueError("runtime must be non-negative")

    @property
    def converged(self) -> bool:
        return self.runtime is not None

    def flag_label(self) -> str:
        on = [k for k, v in sorted(self.flags.items()) if v]
        return "+".join(on) if on else "default"

    def to_json(self) -> dict:
        return {"formulation": self.formulation, "n": self.n, "flags": dict(sorted(self.flags.items())),
                "runtime": self.runtime, "gap": self.gap, "nodes": self.nodes, "solutions": self.solutions}

    @staticmethod
    def from_json(obj: dict) -> "RunRecord":
        return RunRecord(obj["formulation"], int(obj["n"]), dict(obj.get("flags") or {}), obj.get("runtime"),
                         obj.get("gap"), obj.get("nodes"), obj.get("solutions"))


MIN_MARK = "*"
MAX_MARK = "!"


def _cell(r: RunRecord) -> str:
    return f"{r.runtime:.1f}s" if r.converged else f"{r.gap:.1f}%"


def _badness(r: RunRecord):
    # a converged run always beats one that stopped with a gap
    return (0, r.runtime) if r.converged else (1, r.gap)


def summarize(records: Sequence[RunRecord]) -> tuple[str, dict]:
    """Table per (n, flags) row and formulation column; best cell marked ``*``, worst ``!``."""
    if not records:
        return "", {"columns": [], "rows": []}
    order = {k: q for q, k in enumerate(("NU", "SU", "RU", "HU", "SBL", "SBM"))}
    cols = sorted({r.formulation for r in records}, key=lambda f: (order.get(f, len(order)), f))
    keys = sorted({(r.n, r.flag_label()) for r in records})
    table = []
    for n, label in keys:
        here = {r.formulation: r for r in records if r.n == n and r.flag_label() == label}
        cells = {f: _cell(r) for f, r in here.items()}
        if len(here) > 1:
            ranked = sorted(here.values(), key=_badness)
            best, worst = _badness(ranked[0]), _badness(ranked[-1])
            if best != worst:
                for f, r in here.items():
                    if _badness(r) == best:
                        cells[f] += MIN_MARK
                    elif _badness(r) == worst:
                        cells[f] += MAX_MARK
        table.append({"n": n, "flags": label, "cells": {f: cells.get(f, "-") for f in cols}})
    head = ["N", "flags"] + cols
    body = [[str(row["n"]), row["flags"]] + [row["cells"][f] for f in cols] for row in table]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    text = "\n".join("  ".join(v.rjust(w) for v, w in zip(line, widths)) for line in [head] + body) + "\n"
    return text, {"columns": cols, "rows": table}
