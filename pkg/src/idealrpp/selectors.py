"""Selector functions mapping hypercube codes to disjunct weights."""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Sequence

from .rational import as_rat

HAMMING = "hamming"
UNIFORM_HAMMING = "uniform_hamming"
MULTILINEAR = "multilinear"
KINDS = (HAMMING, UNIFORM_HAMMING, MULTILINEAR)

# reflected Gray code per disjunct of a pair (i, j); keys use the roles, not indices
GRAY_CODES = {
    ("i", "j", "x"): (0, 0),
    ("i", "j", "y"): (1, 0),
    ("j", "i", "x"): (1, 1),
    ("j", "i", "y"): (0, 1),
}


def code_for(i: int, j: int, term: tuple[int, int, str]) -> tuple[int, int]:
    k, l, s = term
    role = ("i", "j") if (k, l) == (i, j) else ("j", "i")
    return GRAY_CODES[role + (s,)]


def selector_eval(kind: str, code: Sequence[int], point: Sequence, delta=None) -> Fraction:
    """Exact selector value.

    For the multilinear kind with two bits, passing ``delta`` evaluates the
    linearized form where the product of the two bits is replaced by it.
    """
    pt = [as_rat(v) for v in point]
    if len(pt) != len(code):
        raise ValueError("code and point lengths differ")
    if any(v < 0 or v > 1 for v in pt):
        raise ValueError("selector point must lie in the unit cube")
    if kind in (HAMMING, UNIFORM_HAMMING):
        h = 1 - sum((abs(c - v) for c, v in zip(code, pt)), Fraction(0))
        return max(Fraction(0), h) if kind == UNIFORM_HAMMING else h
    if kind != MULTILINEAR:
        raise ValueError(f"unknown selector kind {kind!r}")
    if delta is not None:
        if len(code) != 2:
            raise ValueError("the linearized multilinear selector is defined for two bits")
        const, a, b, d = multilinear_form(code)
        return const + a * pt[0] + b * pt[1] + d * as_rat(delta)
    out = Fraction(1)
    for c, v in zip(code, pt):
        out *= v if c else 1 - v
    return out


def hamming_form(code: Sequence[int]) -> tuple[Fraction, ...]:
    """(constant, coefficient per bit) of ``1 - ||code - delta||_1`` on the cube."""
    const = Fraction(1)
    coefs = []
    for c in code:
        if c:
            const -= 1
            coefs.append(Fraction(1))
        else:
            coefs.append(Fraction(-1))
    return (const, *coefs)


def multilinear_form(code: Sequence[int]) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """(constant, d_ij, d_ji, Delta) coefficients of the two-bit product form."""
    if len(code) != 2:
        raise ValueError("two-bit codes only")
    # expand prod (v if c else 1 - v) with v1*v2 -> Delta
    terms = {(): Fraction(1)}
    for pos, c in enumerate(code):
        nxt: dict = {}
        for mono, coef in terms.items():
            if c:
                nxt[mono + (pos,)] = nxt.get(mono + (pos,), 0) + coef
            else:
                nxt[mono] = nxt.get(mono, 0) + coef
                nxt[mono + (pos,)] = nxt.get(mono + (pos,), 0) - coef
        terms = nxt
    return (Fraction(terms.get((), 0)), Fraction(terms.get((0,), 0)),
            Fraction(terms.get((1,), 0)), Fraction(terms.get((0, 1), 0)))


def all_codes(r: int) -> list[tuple[int, ...]]:
    return list(product((0, 1), repeat=r))


def kronecker_holds(kind: str, r: int) -> bool:
    return all(selector_eval(kind, c, d) == (1 if c == d else 0) for c in all_codes(r) for d in all_codes(r))


def partition_sum(kind: str, point: Sequence) -> Fraction:
    r = len(point)
    return sum((selector_eval(kind, c, point) for c in all_codes(r)), Fraction(0))
