"""Mechanical checks of the pairwise dependence covers.

Every item names collections of tagged rows on the pairwise relaxation of
one formulation and a claim about them: the augmented rows ``[a | b]`` are
linearly dependent, have a given rank, or grow in rank by a given amount
when more rows are added.  Items are checked for every realization whose
parameter condition holds.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .formulations import bname, build, sub_instance, uname
from .mblp import ConstraintTag, Relaxation, compose_relaxation
from .rational import RatMatrix, left_nullspace, matvec, rank, rat_str
from .rpp import RppInstance, derive_params, pair_terms

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"


class ConditionNotMet(ValueError):
    pass


def _other(s: str) -> str:
    return "y" if s == "x" else "x"


def _real(k, l, s):
    return (k + 1, l + 1, s)


# row references; each returns a tag on the pairwise relaxation


def _su(name):
    return lambda k, l, s: ConstraintTag(f"SU:{name}", _real(k, l, s))


def _ru(name):
    return lambda k, l, s: ConstraintTag(f"RU:{name}", _real(k, l, s))


def _sb(name):
    return lambda k, l, s: ConstraintTag(f"SB:{name}", _real(k, l, s))


def _db(k, l, s):
    return ConstraintTag("db-", (uname(k, l, s),))


def _disj(i, j):
    return ConstraintTag("SU:disj", (i + 1, j + 1))


def _s1(i, j, s):
    return ConstraintTag("RU:s1", (i + 1, j + 1, s))


def _s2(i, j):
    return ConstraintTag("RU:s2", (i + 1, j + 1))


def kappa(i: int, j: int, k: int, l: int, s: str) -> ConstraintTag:
    """The McCormick row that forces the ``(k, l, s)`` selector to zero when tight."""
    if s == "y":
        return ConstraintTag("SB:McCor01", (k + 1, l + 1))
    if (k, l) == (i, j):
        return ConstraintTag("SB:McCor2", (i + 1, j + 1))
    return ConstraintTag("SB:McCor3", (i + 1, j + 1))


def _sb_db(side, k, l):
    return ConstraintTag("db-" if side == "-" else "db+", (bname(k, l),))


lb, ub, pm = _su("lb"), _su("ub"), _su("pm")
rlb, rub, rrm = _ru("lb"), _ru("ub"), _ru("rm")
slb, sub, spm = _sb("lb"), _sb("ub"), _sb("pm")


@dataclass(frozen=True)
class Claim:
    """``kind`` is one of dependent, rank, increase, at-most, removable, vanishes."""
    kind: str
    rows: tuple
    value: int | None = None
    base: tuple = ()
    removed: tuple = ()
    weights: tuple = ()


@dataclass(frozen=True)
class Item:
    ident: str
    kind: str          # formulation whose relaxation the rows live on
    condition: str     # none | kls | both
    claims: Callable   # (i, j, k, l, s) -> list[Claim]
    own_pair_only: bool = False  # realizations restricted to (k, l) = (i, j)
    uses_params: bool = False    # claims also take the derived parameters


def _su_tail(i, j, k, l, s):
    t = _other(s)
    return {
        "i": [_db(k, l, t), _db(l, k, t), _disj(i, j)],
        "ii": [lb(k, l, t), ub(k, l, t), pm(k, l, t), _db(l, k, t), _disj(i, j)],
        "iii": [lb(l, k, t), ub(l, k, t), pm(l, k, t), _db(k, l, t), _disj(i, j)],
    }


def _l2_items() -> list[Item]:
    items = [
        Item("L2.1", "SU", "none",
             lambda i, j, k, l, s: [Claim("dependent", (lb(k, l, s), ub(k, l, s), pm(k, l, s), _db(k, l, s)))]),
        Item("L2.2.A", "SU", "kls",
             lambda i, j, k, l, s: [Claim("dependent", (lb(k, l, s), ub(k, l, s), pm(k, l, s)))]),
    ]
    heads2 = {
        "B": lambda k, l, s: [lb(k, l, s), lb(l, k, s), pm(l, k, s)],
        "C": lambda k, l, s: [ub(k, l, s), ub(l, k, s), pm(l, k, s)],
    }
    heads3 = {
        "A": lambda k, l, s: [lb(k, l, s), ub(l, k, s)],
        "B": lambda k, l, s: [lb(k, l, s), ub(k, l, s), pm(l, k, s)],
        "C": lambda k, l, s: [pm(k, l, s), pm(l, k, s)],
    }
    for cond, prefix, heads in (("kls", "L2.2", heads2), ("both", "L2.3", heads3)):
        for letter, head in heads.items():
            for roman in ("i", "ii", "iii"):
                def claims(i, j, k, l, s, head=head, roman=roman):
                    return [Claim("dependent", tuple(head(k, l, s) + _su_tail(i, j, k, l, s)[roman]))]
                items.append(Item(f"{prefix}.{letter}.{roman}", "SU", cond, claims))
    items.append(Item("L2.3.D", "SU", "both", lambda i, j, k, l, s: [Claim(
        "rank", (lb(k, l, s), lb(l, k, s), ub(k, l, s), ub(l, k, s), pm(k, l, s), pm(l, k, s)), 3)]))
    return items


def _ru_collections(i, j, k, l, s) -> dict:
    """The seven four-row collections that pair with the direction's s1 row."""
    return {
        "i": [rlb(k, l, s), rub(k, l, s), rrm(k, l, s), _db(k, l, s)],
        "ii": [rlb(k, l, s), rlb(l, k, s), rub(k, l, s), rub(l, k, s)],
        "iii": [rrm(k, l, s), rrm(l, k, s), _db(k, l, s), _db(l, k, s)],
        "iv": [rlb(k, l, s), rlb(l, k, s), rrm(l, k, s), _db(k, l, s)],
        "v": [rub(k, l, s), rub(l, k, s), rrm(l, k, s), _db(k, l, s)],
        "vi": [rrm(k, l, s), rrm(l, k, s), rub(l, k, s), rlb(k, l, s)],
        "vii": [_db(k, l, s), _db(l, k, s), rub(l, k, s), rlb(k, l, s)],
    }


def _ru_union(i, j, k, l, s) -> list:
    seen: list = []
    for rows in _ru_collections(i, j, k, l, s).values():
        for r in rows:
            if r not in seen:
                seen.append(r)
    return [_s1(i, j, s)] + seen


def _ru_bases(i, j, k, l, s, need_db: bool) -> list[tuple]:
    bases = [tuple([_s1(i, j, s)] + rows) for rows in _ru_collections(i, j, k, l, s).values()]
    bases.append(tuple(_ru_union(i, j, k, l, s)))
    if need_db:
        bases = [b for b in bases if _db(k, l, s) in b and _db(l, k, s) in b]
    return bases


def _l3_items() -> list[Item]:
    t = _other
    items = [
        Item("L3.1.A", "RU", "none", lambda i, j, k, l, s: [Claim(
            "dependent", (_s1(i, j, s), _s2(i, j), _db(k, l, t(s)), _db(l, k, t(s))))]),
    ]
    for roman in ("i", "ii", "iii", "iv", "v", "vi", "vii"):
        def claims(i, j, k, l, s, roman=roman):
            return [Claim("dependent", tuple([_s1(i, j, s)] + _ru_collections(i, j, k, l, s)[roman]))]
        items.append(Item(f"L3.1.B.{roman}", "RU", "none", claims))
    items.append(Item("L3.1.C", "RU", "none",
                      lambda i, j, k, l, s: [Claim("rank", tuple(_ru_union(i, j, k, l, s)), 5)]))

    def d_claims(i, j, k, l, s):
        out = []
        for base in _ru_bases(i, j, k, l, s, need_db=True):
            step1 = (_s1(i, j, t(s)), _s2(i, j))
            out.append(Claim("increase", step1, 1, base=base))
            out.append(Claim("increase", (_db(k, l, t(s)), _db(l, k, t(s))), 1, base=base + step1))
        return out
    items.append(Item("L3.1.D", "RU", "none", d_claims))

    def e_claims(i, j, k, l, s):
        # three rows in, one new dependency among them and the base
        added = (_s2(i, j), _db(k, l, t(s)), _db(l, k, t(s)))
        return [Claim("increase", added, len(added) - 1, base=b) for b in _ru_bases(i, j, k, l, s, need_db=False)]
    items.append(Item("L3.1.E", "RU", "none", e_claims))
    items.append(Item("L3.2.A", "RU", "kls", lambda i, j, k, l, s: [Claim(
        "dependent", (rlb(l, k, s), rub(l, k, s), rrm(l, k, s), _db(l, k, s)))]))

    def b_claims(i, j, k, l, s):
        out = []
        for rows in _ru_collections(i, j, k, l, s).values():
            if _db(k, l, s) in rows:
                out.append(Claim("removable", tuple([_s1(i, j, s)] + rows), removed=(_db(k, l, s),)))
        return out
    items.append(Item("L3.2.B", "RU", "kls", b_claims))
    return items


def _l4_items() -> list[Item]:
    t = _other
    items = [
        Item("L4.1.A", "SBM", "none", lambda i, j, k, l, s: [
            Claim("dependent", (kappa(i, j, k, l, s), slb(k, l, s), sub(k, l, s), spm(k, l, s))),
            Claim("increase", (slb(k, l, s), sub(k, l, s), spm(k, l, s)), 2, base=(kappa(i, j, k, l, s),)),
            Claim("at-most", (slb(k, l, s), sub(k, l, s), spm(k, l, s)), 2,
                  base=(kappa(i, j, k, l, s), kappa(i, j, l, k, s), kappa(i, j, k, l, t(s)),
                        kappa(i, j, l, k, t(s)))),
        ]),
        Item("L4.1.B.i", "SBM", "none", lambda i, j, k, l, s: [Claim(
            "dependent", (_sb_db("-", k, l), ConstraintTag("SB:McCor01", (k + 1, l + 1)),
                          ConstraintTag("SB:McCor3", (i + 1, j + 1))))]),
        Item("L4.1.B.ii", "SBM", "none", lambda i, j, k, l, s: [Claim(
            "dependent", (_sb_db("+", k, l), ConstraintTag("SB:McCor01", (l + 1, k + 1)),
                          ConstraintTag("SB:McCor2", (i + 1, j + 1))))]),
        Item("L4.2.A", "SBM", "kls", lambda i, j, k, l, s: [Claim(
            "dependent", (slb(k, l, s), sub(k, l, s), spm(k, l, s)))]),
    ]
    two_b = {
        "i": lambda k, l, s: [slb(k, l, s), slb(l, k, s), spm(l, k, s)],
        "ii": lambda k, l, s: [sub(k, l, s), sub(l, k, s), spm(l, k, s)],
    }
    for roman, head in two_b.items():
        def claims(i, j, k, l, s, head=head):
            return [Claim("dependent", tuple([kappa(i, j, k, l, t(s)), kappa(i, j, l, k, t(s))] + head(k, l, s)))]
        items.append(Item(f"L4.2.B.{roman}", "SBM", "kls", claims))
    def block(i, j, k, l, s, prm):
        rows = (slb(i, j, s), sub(i, j, s), spm(i, j, s), slb(j, i, s), sub(j, i, s), spm(j, i, s))
        return [Claim("rank", rows, 3), Claim("vanishes", rows, weights=width_multipliers(prm, i, j, s))]
    items.append(Item("L4.3.A", "SBM", "both", block, own_pair_only=True, uses_params=True))
    three_b = {
        "i": lambda i, j, s: [slb(i, j, s), sub(j, i, s)],
        "ii": lambda i, j, s: [slb(j, i, s), sub(i, j, s)],
        "iii": lambda i, j, s: [spm(j, i, s), spm(i, j, s)],
    }
    for roman, tail in three_b.items():
        def claims(i, j, k, l, s, tail=tail):
            return [Claim("dependent", tuple([kappa(i, j, i, j, t(s)), kappa(i, j, j, i, t(s))] + tail(i, j, s)))]
        items.append(Item(f"L4.3.B.{roman}", "SBM", "both", claims, own_pair_only=True))

    def combined(i, j, k, l, s):
        rows = [kappa(i, j, i, j, t(s)), kappa(i, j, j, i, t(s))]
        for tail in three_b.values():
            rows += tail(i, j, s)
        return [Claim("rank", tuple(rows), 4)]
    items.append(Item("L4.3.B.all", "SBM", "both", combined, own_pair_only=True))
    return items


ITEMS: dict[str, Item] = {it.ident: it for it in _l2_items() + _l3_items() + _l4_items()}
LEMMAS = ("L2", "L3", "L4")


def items_of(lemma: str) -> list[str]:
    lemma = lemma.upper()
    if lemma not in LEMMAS:
        raise ValueError(f"unknown lemma {lemma!r}; expected one of {', '.join(LEMMAS)}")
    return [k for k in ITEMS if k.split(".")[0] == lemma]


@dataclass(frozen=True)
class LemmaSpec:
    lemma: str
    items: tuple[str, ...] | None = None
    pair: tuple[int, int] = (0, 1)

    def resolved(self) -> list[str]:
        ids = items_of(self.lemma)
        if self.items is None:
            return ids
        unknown = [i for i in self.items if i not in ids]
        if unknown:
            raise ValueError(f"unknown items for {self.lemma}: {', '.join(unknown)}")
        return list(self.items)


@dataclass
class ClaimCheck:
    realization: tuple
    claim: str
    rows: list[str]
    expected: int | None
    observed: int
    ok: bool
    multipliers: list[list[str]] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "realization": list(self.realization),
            "claim": self.claim,
            "rows": self.rows,
            "observed": self.observed,
            "ok": self.ok,
        }
        if self.expected is not None:
            out["expected"] = self.expected
        if self.multipliers:
            out["multipliers"] = self.multipliers
        return out


@dataclass
class ItemResult:
    status: str
    checks: list[ClaimCheck] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"status": self.status, "checks": [c.to_json() for c in self.checks]}


@dataclass
class LemmaReport:
    lemma: str
    items: dict[str, ItemResult]

    @property
    def passed(self) -> bool:
        return all(r.status != FAIL for r in self.items.values())

    def to_json(self) -> dict:
        return {k: v.to_json() for k, v in self.items.items()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def condition_holds(inst: RppInstance, cond: str, k: int, l: int, s: str) -> bool:
    prm = derive_params(inst)

    def tight(a, b):
        return prm.P[(a, b, s)] == prm.UB[(b, s)] - prm.LB[(a, s)]
    if cond == "none":
        return True
    if cond == "kls":
        return tight(k, l)
    if cond == "both":
        return tight(k, l) and tight(l, k)
    raise ValueError(f"unknown condition {cond!r}")


_relax_cache: dict = {}


def pairwise_relaxation(kind: str, inst: RppInstance, pair=(0, 1)) -> Relaxation:
    key = (kind, inst, tuple(pair))
    if key not in _relax_cache:
        _relax_cache[key] = compose_relaxation(build(kind, inst, pair=pair))
    return _relax_cache[key]


def _aug(relax: Relaxation, tags: Sequence[ConstraintTag]) -> RatMatrix:
    rows = []
    for t in tags:
        r = relax.rows[relax.row_by_tag(t)]
        rows.append(list(r.coeffs) + [r.rhs])
    return RatMatrix(rows, relax.n + 1)


def _rank_of(relax, tags) -> int:
    return rank(_aug(relax, tags)) if tags else 0


def _evaluate(relax: Relaxation, claim: Claim, real) -> ClaimCheck:
    labels = [t.label() for t in claim.base + claim.rows]
    mult: list = []
    if claim.kind == "dependent":
        r = _rank_of(relax, claim.rows)
        ok = r < len(claim.rows)
        mult = left_nullspace(_aug(relax, claim.rows))
        return ClaimCheck(real, "dependent", labels, None, r, ok, [[rat_str(v) for v in m] for m in mult])
    if claim.kind == "rank":
        r = _rank_of(relax, claim.rows)
        mult = left_nullspace(_aug(relax, claim.rows))
        return ClaimCheck(real, "rank", labels, claim.value, r, r == claim.value,
                          [[rat_str(v) for v in m] for m in mult])
    if claim.kind == "vanishes":
        m = _aug(relax, claim.rows)
        residual = matvec(m.transpose(), list(claim.weights))
        nonzero = sum(1 for v in residual if v != 0)
        return ClaimCheck(real, "combination-vanishes", labels, 0, nonzero, nonzero == 0,
                          [[rat_str(v) for v in claim.weights]])
    if claim.kind in ("increase", "at-most"):
        # duplicate rows in base and addition count once
        extra = tuple(t for t in claim.rows if t not in claim.base)
        inc = _rank_of(relax, claim.base + extra) - _rank_of(relax, claim.base)
        ok = inc == claim.value if claim.kind == "increase" else inc <= claim.value
        return ClaimCheck(real, f"rank-{claim.kind}", labels, claim.value, inc, ok)
    if claim.kind == "removable":
        kept = tuple(t for t in claim.rows if t not in claim.removed)
        r_all = _rank_of(relax, claim.rows)
        r_kept = _rank_of(relax, kept)
        ok = r_all < len(claim.rows) and r_kept < len(kept)
        mult = left_nullspace(_aug(relax, kept))
        return ClaimCheck(real, "dependent-after-removal", [t.label() for t in kept], None, r_kept, ok,
                          [[rat_str(v) for v in m] for m in mult])
    raise ValueError(f"unknown claim kind {claim.kind!r}")


def verify_item(ident: str, inst: RppInstance, pair=(0, 1), strict: bool = False) -> ItemResult:
    item = ITEMS[ident]
    relax = pairwise_relaxation(item.kind, inst, pair)
    sub = sub_instance(inst, pair)
    prm = derive_params(sub)
    # the relaxation is built on the two-object sub-instance, so indices are 0 and 1
    checks = []
    for (k, l, s) in pair_terms(0, 1):
        if item.own_pair_only and (k, l) != (0, 1):
            continue
        if not condition_holds(sub, item.condition, k, l, s):
            continue
        args = (0, 1, k, l, s) + ((prm,) if item.uses_params else ())
        for claim in item.claims(*args):
            checks.append(_evaluate(relax, claim, _real(k, l, s)))
    if not checks:
        if strict:
            raise ConditionNotMet(f"{ident}: no realization satisfies the '{item.condition}' condition")
        return ItemResult(NOT_APPLICABLE)
    return ItemResult(PASS if all(c.ok for c in checks) else FAIL, checks)


def verify_lemma(spec: LemmaSpec, inst: RppInstance) -> LemmaReport:
    """Check the requested items; items named explicitly must be applicable."""
    ids = spec.resolved()
    strict = spec.items is not None
    return LemmaReport(spec.lemma.upper(), {i: verify_item(i, inst, spec.pair, strict) for i in ids})


def width_multipliers(prm, i: int, j: int, s: str) -> tuple[Fraction, ...]:
    """Weights on lb, ub, pm of ``(i, j, s)`` then ``(j, i, s)`` built from the two slack widths.

    Rows are taken as stored, with upper-bounding rows negated into ``>=`` form.
    """
    wi = prm.UB[(i, s)] - prm.LB[(i, s)]
    wj = prm.UB[(j, s)] - prm.LB[(j, s)]
    return (wi, -wj, Fraction(0), -wj, wi, Fraction(0))


def six_row_block(inst: RppInstance, s: str, pair=(0, 1)) -> RatMatrix:
    """Augmented lb, ub, pm rows of both orders along ``s`` on the multilinear relaxation."""
    relax = pairwise_relaxation("SBM", inst, pair)
    return _aug(relax, (slb(0, 1, s), sub(0, 1, s), spm(0, 1, s), slb(1, 0, s), sub(1, 0, s), spm(1, 0, s)))


LEMMA_FOR_KIND = {"SU": "L2", "RU": "L3", "SBM": "L4"}


def lemma_covers(kind: str, inst: RppInstance, pair=(0, 1)) -> list[tuple[int, ...]]:
    """Row-index sets on the pairwise relaxation that the applicable items prove dependent.

    Only dependence claims are turned into covers; kinds without a
    cover lemma get none.
    """
    lemma = LEMMA_FOR_KIND.get(kind)
    if lemma is None:
        return []
    relax = pairwise_relaxation(kind, inst, pair)
    prm = derive_params(sub_instance(inst, pair))
    out: list[tuple[int, ...]] = []
    seen = set()
    for ident in items_of(lemma):
        item = ITEMS[ident]
        for (k, l, s) in pair_terms(0, 1):
            if item.own_pair_only and (k, l) != (0, 1):
                continue
            if not condition_holds(sub_instance(inst, pair), item.condition, k, l, s):
                continue
            args = (0, 1, k, l, s) + ((prm,) if item.uses_params else ())
            for claim in item.claims(*args):
                if claim.kind == "removable":
                    rows = tuple(t for t in claim.rows if t not in claim.removed)
                elif claim.kind == "dependent":
                    rows = claim.rows
                else:
                    continue
                if _rank_of(relax, rows) >= len(rows):
                    continue
                idx = tuple(sorted(relax.row_by_tag(t) for t in rows))
                if idx not in seen:
                    seen.add(idx)
                    out.append(idx)
    return out
