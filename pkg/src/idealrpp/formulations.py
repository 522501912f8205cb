"""MBLP embeddings of the packing disjunction.

Variables: centers ``c_i_s`` (direction-major), then ``D_i_j`` products for
the multilinear binary kind, then ``h`` for strip packing; binaries last.
Unary kinds carry one indicator ``d_k_l_s`` per disjunct, binary kinds two
code bits ``d_i_j`` and ``d_j_i`` per pair.  Object numbers in names and
tags are 1-based.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
from math import lcm

from .mblp import EQ, GE, LE, ConstraintRow, ConstraintTag, MblpModel, make_row
from .rpp import DIRS, RppInstance, TrivialInstance, classify, derive_params, pair_terms
from .selectors import code_for, hamming_form, multilinear_form

KINDS = ("SU", "RU", "HU", "NU", "SBL", "SBM")
UNARY = ("SU", "RU", "HU", "NU")
BINARY = ("SBL", "SBM")
PREFIX = {"SU": "SU", "RU": "RU", "HU": "HU", "NU": "NU", "SBL": "SB", "SBM": "SB"}

CATEGORY = {
    "pm": "precedence", "rm": "precedence",
    "lb": "bounds", "ub": "bounds", "cmin": "bounds", "cmax": "bounds",
    "disj": "logic", "s1": "logic", "s2": "logic", "McCor01": "logic", "McCor2": "logic",
    "McCor3": "aux", "h": "objective", "SPU": "cuts", "SPB": "cuts",
}


def normalize_kind(kind: str) -> str:
    k = kind.upper().replace("-", "")
    if k not in KINDS:
        raise ValueError(f"unknown formulation kind {kind!r}; expected one of {', '.join(KINDS)}")
    return k


def cname(i: int, s: str) -> str:
    return f"c_{i + 1}_{s}"


def uname(k: int, l: int, s: str) -> str:
    return f"d_{k + 1}_{l + 1}_{s}"


def bname(k: int, l: int) -> str:
    return f"d_{k + 1}_{l + 1}"


def dname(i: int, j: int) -> str:
    return f"D_{i + 1}_{j + 1}"


def variable_layout(kind: str, n: int, spp: bool = False) -> tuple[list[str], list[str]]:
    kind = normalize_kind(kind)
    pairs = list(combinations(range(n), 2))
    cont = [cname(i, s) for s in DIRS for i in range(n)]
    if kind == "SBM":
        cont += [dname(i, j) for i, j in pairs]
    if spp:
        cont.append("h")
    if kind in UNARY:
        bins = [uname(k, l, s) for i, j in pairs for (k, l, s) in pair_terms(i, j)]
    else:
        bins = [name for i, j in pairs for name in (bname(i, j), bname(j, i))]
    return cont, bins


class _RowSink:
    def __init__(self, names: list[str]):
        self.names = names
        self.pos = {v: k for k, v in enumerate(names)}
        self.rows: list[ConstraintRow] = []

    def add(self, terms: dict, sense: str, rhs, family: str, realization: tuple):
        coeffs = [Fraction(0)] * len(self.names)
        for name, c in terms.items():
            coeffs[self.pos[name]] += Fraction(c)
        self.rows.append(make_row(coeffs, rhs, sense, ConstraintTag(family, realization)))


def _real(k, l, s):
    return (k + 1, l + 1, s)


def _indicator(kind: str, i: int, j: int, term) -> tuple[Fraction, dict]:
    """The expression standing in for the term's indicator: (constant, terms)."""
    k, l, s = term
    if kind in UNARY:
        return Fraction(0), {uname(k, l, s): Fraction(1)}
    code = code_for(i, j, term)
    a, b = bname(i, j), bname(j, i)
    if kind == "SBL":
        const, ca, cb = hamming_form(code)
        return const, {a: ca, b: cb}
    const, ca, cb, cd = multilinear_form(code)
    return const, {a: ca, b: cb, dname(i, j): cd}


def _scaled(terms: dict, f) -> dict:
    return {v: -f * c for v, c in terms.items() if c != 0 and f != 0}


def _merge(*parts: dict) -> dict:
    out: dict = {}
    for p in parts:
        for v, c in p.items():
            out[v] = out.get(v, 0) + c
    return out


def _su_block(sink: _RowSink, kind: str, fam: str, prm, i: int, j: int, families=("lb", "ub", "pm")):
    LB, UB, P = prm.LB, prm.UB, prm.P
    terms = pair_terms(i, j)
    if "lb" in families:
        for (k, l, s) in terms:
            y0, y = _indicator(kind, i, j, (k, l, s))
            a = LB[(k, s)] + P[(k, l, s)] - LB[(l, s)]
            # c_l - a*Y >= LB_l
            sink.add(_merge({cname(l, s): 1}, _scaled(y, a)), GE, LB[(l, s)] + a * y0, f"{fam}:lb", _real(k, l, s))
    if "ub" in families:
        for (k, l, s) in terms:
            y0, y = _indicator(kind, i, j, (k, l, s))
            b = UB[(l, s)] - P[(k, l, s)] - UB[(k, s)]
            # c_k - b*Y <= UB_k
            sink.add(_merge({cname(k, s): 1}, _scaled(y, b)), LE, UB[(k, s)] + b * y0, f"{fam}:ub", _real(k, l, s))
    if "pm" in families:
        for (k, l, s) in terms:
            y0, y = _indicator(kind, i, j, (k, l, s))
            c = LB[(l, s)] - P[(k, l, s)] - UB[(k, s)]
            # c_k - c_l - c*Y <= UB_k - LB_l
            sink.add(_merge({cname(k, s): 1, cname(l, s): -1}, _scaled(y, c)), LE,
                     UB[(k, s)] - LB[(l, s)] + c * y0, f"{fam}:pm", _real(k, l, s))


def _ru_rm(sink: _RowSink, fam: str, prm, i: int, j: int):
    LB, UB, P = prm.LB, prm.UB, prm.P
    for (k, l, s) in pair_terms(i, j):
        p_kl, p_lk = P[(k, l, s)], P[(l, k, s)]
        terms = {
            cname(k, s): 1,
            cname(l, s): -1,
            uname(k, l, s): p_lk + p_kl,
            uname(l, k, s): -(UB[(k, s)] - p_lk - LB[(l, s)]),
        }
        sink.add(terms, LE, p_lk, f"{fam}:rm", _real(k, l, s))


def _ru_logic(sink: _RowSink, fam: str, i: int, j: int):
    for s in DIRS:
        sink.add({uname(i, j, s): 1, uname(j, i, s): 1}, LE, 1, f"{fam}:s1", (i + 1, j + 1, s))
    sink.add({uname(k, l, s): 1 for (k, l, s) in pair_terms(i, j)}, GE, 1, f"{fam}:s2", (i + 1, j + 1))


def _static_bounds(sink: _RowSink, fam: str, prm, objects):
    for s in DIRS:
        for i in objects:
            sink.add({cname(i, s): 1}, GE, prm.LB[(i, s)], f"{fam}:cmin", (i + 1, s))
            sink.add({cname(i, s): 1}, LE, prm.UB[(i, s)], f"{fam}:cmax", (i + 1, s))


def sub_instance(inst: RppInstance, objects) -> RppInstance:
    objects = list(objects)
    remap = {old: new for new, old in enumerate(objects)}
    ov = {(remap[k], remap[l], s): v for (k, l, s), v in inst.p_overrides.items() if k in remap and l in remap}
    return RppInstance(inst.region, tuple(inst.objects[i] for i in objects), ov)


def build(kind: str, inst: RppInstance, pair=None, force: bool = False, nu_big_m=None,
          spp: bool = False) -> MblpModel:
    """Build the MBLP for every pair of objects (or for one given pair).

    ``nu_big_m`` overrides the naive formulation's constant, either a number
    or a mapping keyed like the margins.  With ``spp`` the model gets the
    height variable ``h`` (rows are added by the strip-packing builder).
    """
    kind = normalize_kind(kind)
    if pair is not None:
        inst = sub_instance(inst, pair)
    if not force:
        cls = classify(inst)
        if cls.trivial:
            raise TrivialInstance("; ".join(cls.reasons))
    prm = derive_params(inst)
    n = inst.n
    cont, bins = variable_layout(kind, n, spp=spp)
    sink = _RowSink(cont + bins)
    fam = PREFIX[kind]
    pairs = list(combinations(range(n), 2))
    for i, j in pairs:
        if kind == "SU":
            _su_block(sink, kind, fam, prm, i, j)
            sink.add({uname(k, l, s): 1 for (k, l, s) in pair_terms(i, j)}, EQ, 1, "SU:disj", (i + 1, j + 1))
        elif kind == "RU":
            _su_block(sink, kind, fam, prm, i, j, ("lb", "ub"))
            _ru_rm(sink, fam, prm, i, j)
            _ru_logic(sink, fam, i, j)
        elif kind == "HU":
            _su_block(sink, kind, fam, prm, i, j, ("lb", "ub"))
            _ru_rm(sink, fam, prm, i, j)
            _su_block(sink, kind, fam, prm, i, j, ("pm",))
            _ru_logic(sink, fam, i, j)
        elif kind == "NU":
            for (k, l, s) in pair_terms(i, j):
                if nu_big_m is None:
                    big = prm.UB[(k, s)] - prm.LB[(l, s)]
                elif isinstance(nu_big_m, dict):
                    big = Fraction(nu_big_m[(k, l, s)])
                else:
                    big = Fraction(nu_big_m)
                p = prm.P[(k, l, s)]
                sink.add({cname(k, s): 1, cname(l, s): -1, uname(k, l, s): p + big}, LE, big,
                         "NU:pm", _real(k, l, s))
            sink.add({uname(k, l, s): 1 for (k, l, s) in pair_terms(i, j)}, EQ, 1, "NU:disj", (i + 1, j + 1))
        elif kind == "SBL":
            _su_block(sink, kind, fam, prm, i, j)
        else:
            _su_block(sink, kind, fam, prm, i, j)
            a, b, d = bname(i, j), bname(j, i), dname(i, j)
            sink.add({a: 1, d: -1}, GE, 0, "SB:McCor01", (i + 1, j + 1))
            sink.add({b: 1, d: -1}, GE, 0, "SB:McCor01", (j + 1, i + 1))
            sink.add({a: 1, b: 1, d: -1}, LE, 1, "SB:McCor2", (i + 1, j + 1))
            sink.add({d: 1}, GE, 0, "SB:McCor3", (i + 1, j + 1))
    if kind in ("NU", "SBL"):
        _static_bounds(sink, fam, prm, range(n))
    elif n == 1:
        # a lone object has no pair block to bound its center
        _static_bounds(sink, fam, prm, range(n))
    return MblpModel(len(cont), len(bins), sink.rows, cont + bins, name=f"{kind}-{n}")


def row_counts(m: MblpModel) -> dict:
    out: dict = {}
    for row in m.rows:
        short = row.tag.family.split(":", 1)[-1]
        cat = CATEGORY.get(short, short)
        out[cat] = out.get(cat, 0) + 1
    return out


class TooFewObjects(ValueError):
    pass


def sequence_pair_cuts(kind: str, n: int, var_names=None) -> list[ConstraintRow]:
    """Transitivity cuts over object triples, laid out for ``var_names``."""
    kind = normalize_kind(kind)
    if n < 3:
        raise TooFewObjects("sequence-pair cuts need at least three objects")
    if var_names is None:
        cont, bins = variable_layout(kind, n)
        var_names = cont + bins
    sink = _RowSink(list(var_names))
    for tri in combinations(range(n), 3):
        if kind in UNARY:
            for s in DIRS:
                for i, j, k in permutations(tri):
                    sink.add({uname(i, j, s): 1, uname(j, k, s): 1, uname(i, k, s): -1}, LE, 1,
                             "SPU", (i + 1, j + 1, k + 1, s))
        else:
            i, j, k = tri
            fwd = {bname(i, j): 1, bname(j, k): 1, bname(i, k): -1}
            bwd = {bname(j, i): 1, bname(k, j): 1, bname(k, i): -1}
            for label, terms in (("fwd", fwd), ("bwd", bwd)):
                sink.add(terms, GE, 0, "SPB", (i + 1, j + 1, k + 1, label, "lo"))
                sink.add(terms, LE, 1, "SPB", (i + 1, j + 1, k + 1, label, "hi"))
    return sink.rows


def branching_priority(kind: str, inst: RppInstance) -> dict:
    """Exact priorities per binary variable, scaled to integers if needed."""
    kind = normalize_kind(kind)
    objs = inst.objects
    n = inst.n
    area = [o.d[0] * o.d[1] for o in objs]
    raw = {}
    if kind in UNARY:
        sig = {(i, s): objs[i].sigma_plus(s) + objs[i].sigma_minus(s) for i in range(n) for s in DIRS}
        for s in DIRS:
            smax = max(sig[(k, s)] for k in range(n))
            dmax = max(objs[k].dim(s) for k in range(n))
            for i, j in combinations(range(n), 2):
                val = min(sig[(i, s)], sig[(j, s)]) + (smax + 1) * (
                    min(objs[i].dim(s), objs[j].dim(s)) + (dmax + 1) * min(area[i], area[j]))
                raw[uname(i, j, s)] = val
                raw[uname(j, i, s)] = val
    else:
        sig = [sum(o.sigma, Fraction(0)) for o in objs]
        smax = max(sig) if sig else 0
        for i, j in combinations(range(n), 2):
            val = min(sig[i], sig[j]) + (smax + 1) * min(area[i], area[j])
            raw[bname(i, j)] = val
            raw[bname(j, i)] = val
    den = lcm(1, *(v.denominator for v in raw.values()))
    return {name: int(v * den) for name, v in raw.items()}
