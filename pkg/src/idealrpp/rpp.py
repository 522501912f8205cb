"""Rectangle packing instances with clearances and their derived parameters."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .rational import as_rat, rat_str

DIRS = ("x", "y")


class TrivialInstance(ValueError):
    pass


@dataclass(frozen=True)
class RppObject:
    d: tuple[Fraction, Fraction]
    # clearance order: x-, y-, x+, y+
    sigma: tuple[Fraction, Fraction, Fraction, Fraction] = (Fraction(0),) * 4

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(as_rat(v) for v in self.d))
        object.__setattr__(self, "sigma", tuple(as_rat(v) for v in self.sigma))
        if len(self.d) != 2 or len(self.sigma) != 4:
            raise ValueError("an object needs 2 dimensions and 4 clearances")
        if min(self.d) < 0 or min(self.sigma) < 0:
            raise ValueError("dimensions and clearances must be non-negative")

    def dim(self, s: str) -> Fraction:
        return self.d[DIRS.index(s)]

    def sigma_minus(self, s: str) -> Fraction:
        return self.sigma[DIRS.index(s)]

    def sigma_plus(self, s: str) -> Fraction:
        return self.sigma[2 + DIRS.index(s)]

    def extent(self, s: str) -> Fraction:
        """Physical size plus both clearances along ``s``."""
        return self.sigma_minus(s) + self.dim(s) + self.sigma_plus(s)


@dataclass(frozen=True)
class RppInstance:
    region: tuple[Fraction, Fraction]
    objects: tuple[RppObject, ...]
    # keys (k, l, s) with 0-based object indices
    p_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "region", tuple(as_rat(v) for v in self.region))
        object.__setattr__(self, "objects", tuple(self.objects))
        ov = {(int(k), int(l), s): as_rat(v) for (k, l, s), v in dict(self.p_overrides).items()}
        object.__setattr__(self, "p_overrides", ov)
        if min(self.region) < 0:
            raise ValueError("region dimensions must be non-negative")
        for (k, l, s) in ov:
            for kk, ll in ((k, l), (l, k)):
                for ss in DIRS:
                    if (kk, ll, ss) not in ov:
                        raise ValueError("overrides must cover whole pairs (both orders, both directions)")

    def __hash__(self):
        return hash((self.region, self.objects, tuple(sorted(self.p_overrides.items()))))

    @property
    def n(self) -> int:
        return len(self.objects)

    def r(self, s: str) -> Fraction:
        return self.region[DIRS.index(s)]

    def with_region(self, rx=None, ry=None) -> "RppInstance":
        return RppInstance((self.region[0] if rx is None else rx, self.region[1] if ry is None else ry),
                           self.objects, self.p_overrides)

    def to_json(self) -> dict:
        out = {
            "region": [rat_str(v) for v in self.region],
            "objects": [{"d": [rat_str(v) for v in o.d], "sigma": [rat_str(v) for v in o.sigma]}
                        for o in self.objects],
        }
        if self.p_overrides:
            out["p_overrides"] = {f"{k + 1},{l + 1},{s}": rat_str(v)
                                  for (k, l, s), v in sorted(self.p_overrides.items())}
        return out

    @staticmethod
    def from_json(obj: dict) -> "RppInstance":
        objs = tuple(RppObject(tuple(o["d"]), tuple(o.get("sigma", (0, 0, 0, 0)))) for o in obj["objects"])
        ov = {}
        for key, v in (obj.get("p_overrides") or {}).items():
            k, l, s = key.split(",")
            ov[(int(k) - 1, int(l) - 1, s.strip())] = v
        return RppInstance(tuple(obj["region"]), objs, ov)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def lower_bound(inst: RppInstance, i: int, s: str) -> Fraction:
    o = inst.objects[i]
    return o.dim(s) / 2 + o.sigma_minus(s)


def upper_bound(inst: RppInstance, i: int, s: str) -> Fraction:
    o = inst.objects[i]
    return inst.r(s) - o.dim(s) / 2 - o.sigma_plus(s)


def margin(inst: RppInstance, k: int, l: int, s: str) -> Fraction:
    """Minimum center distance for ``k`` to precede ``l`` along ``s``."""
    if (k, l, s) in inst.p_overrides:
        return inst.p_overrides[(k, l, s)]
    ok, ol = inst.objects[k], inst.objects[l]
    return ok.dim(s) / 2 + ol.dim(s) / 2 + max(ok.sigma_plus(s), ol.sigma_minus(s))


@dataclass(frozen=True)
class DerivedParams:
    LB: dict
    UB: dict
    P: dict


def derive_params(inst: RppInstance) -> DerivedParams:
    LB = {(i, s): lower_bound(inst, i, s) for i in range(inst.n) for s in DIRS}
    UB = {(i, s): upper_bound(inst, i, s) for i in range(inst.n) for s in DIRS}
    P = {(k, l, s): margin(inst, k, l, s) for k in range(inst.n) for l in range(inst.n) if k != l for s in DIRS}
    return DerivedParams(LB, UB, P)


def pair_terms(i: int, j: int) -> list[tuple[int, int, str]]:
    """Disjunctive terms of a pair in the fixed order ijx, jix, ijy, jiy."""
    return [(i, j, "x"), (j, i, "x"), (i, j, "y"), (j, i, "y")]


@dataclass(frozen=True)
class TermFlags:
    fits: bool        # P <= UB_l - LB_k
    boundary: bool    # P == UB_l - LB_k
    strict_lb: bool   # P + LB_k - LB_l > 0
    strict_ub: bool   # P + UB_k - UB_l > 0


@dataclass(frozen=True)
class InstanceClass:
    trivial: bool
    reasons: tuple[str, ...]
    terms: dict

    @property
    def all_fit(self) -> bool:
        return all(t.fits for t in self.terms.values())

    @property
    def boundary_terms(self) -> list:
        return [k for k, t in self.terms.items() if t.boundary]

    @property
    def su_hypothesis(self) -> bool:
        return not self.trivial and self.all_fit

    sbm_hypothesis = su_hypothesis

    @property
    def ru_hypothesis(self) -> bool:
        return self.su_hypothesis and all(t.strict_lb and t.strict_ub for t in self.terms.values())

    def summary(self) -> dict:
        return {
            "trivial": self.trivial,
            "reasons": list(self.reasons),
            "su_hypothesis": self.su_hypothesis,
            "ru_hypothesis": self.ru_hypothesis,
            "sbm_hypothesis": self.sbm_hypothesis,
            "boundary": [f"{k + 1},{l + 1},{s}" for (k, l, s) in self.boundary_terms],
        }


def classify(inst: RppInstance) -> InstanceClass:
    prm = derive_params(inst)
    reasons = []
    for s in DIRS:
        if inst.r(s) == 0:
            reasons.append(f"r_{s} = 0")
    for i in range(inst.n):
        for s in DIRS:
            gap = prm.UB[(i, s)] - prm.LB[(i, s)]
            if gap == 0:
                reasons.append(f"object {i + 1} has no room along {s}")
            elif gap < 0:
                reasons.append(f"object {i + 1} does not fit along {s}")
    terms = {}
    for (k, l, s), p in prm.P.items():
        if p <= 0:
            reasons.append(f"non-positive margin P_{k + 1}{l + 1}{s}")
        room = prm.UB[(l, s)] - prm.LB[(k, s)]
        terms[(k, l, s)] = TermFlags(
            fits=p <= room,
            boundary=p == room,
            strict_lb=p + prm.LB[(k, s)] - prm.LB[(l, s)] > 0,
            strict_ub=p + prm.UB[(k, s)] - prm.UB[(l, s)] > 0,
        )
    # a pair with no admissible term cannot be packed
    for i in range(inst.n):
        for j in range(i + 1, inst.n):
            if not any(terms[t].fits for t in pair_terms(i, j)):
                reasons.append(f"objects {i + 1} and {j + 1} cannot be separated")
    return InstanceClass(bool(reasons), tuple(reasons), terms)


def pair_instance(d1: Sequence, d2: Sequence, region: Sequence, s1=(0, 0, 0, 0), s2=(0, 0, 0, 0)) -> RppInstance:
    return RppInstance(tuple(region), (RppObject(tuple(d1), tuple(s1)), RppObject(tuple(d2), tuple(s2))))
