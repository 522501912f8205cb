"""Floating-point cross-checks through scipy; used only as independent witnesses."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp


def solve_model(m):
    """Optimum of an exported-style model (rows are >= or =) with scipy's MILP."""
    a = np.array([[float(v) for v in r.coeffs] for r in m.rows])
    lo = np.array([float(r.rhs) for r in m.rows])
    hi = np.array([np.inf if r.sense == ">=" else float(r.rhs) for r in m.rows])
    c = np.array([float(v) for v in m.objective])
    if m.maximize:
        c = -c
    integ = np.array([0] * m.n_c + [1] * m.n_b)
    bounds = Bounds(np.array([-np.inf] * m.n_c + [0] * m.n_b), np.array([np.inf] * m.n_c + [1] * m.n_b))
    res = milp(c, constraints=LinearConstraint(a, lo, hi), integrality=integ, bounds=bounds)
    if res.status != 0:
        return None
    return -res.fun if m.maximize else res.fun


def spp_height_lp(objects, width):
    """Least strip height by one LP per separating-term choice.

    ``objects`` is a list of (dx, dy, sx_minus, sx_plus, sy_minus, sy_plus).
    """
    n = len(objects)
    pairs = list(combinations(range(n), 2))

    def lo(i, s):
        o = objects[i]
        return o[s] / 2 + o[2 + 2 * s]

    def margin(k, l, s):
        ok, ol = objects[k], objects[l]
        return ok[s] / 2 + ol[s] / 2 + max(ok[3 + 2 * s], ol[2 + 2 * s])

    # variables: cx_0..cx_{n-1}, cy_0..cy_{n-1}, h
    nv = 2 * n + 1
    best = None
    for choice in product(range(4), repeat=len(pairs)):
        a_ub, b_ub = [], []
        for (i, j), c in zip(pairs, choice):
            k, l, s = [(i, j, 0), (j, i, 0), (i, j, 1), (j, i, 1)][c]
            row = [0.0] * nv
            row[s * n + k], row[s * n + l] = 1.0, -1.0
            a_ub.append(row)
            b_ub.append(-float(margin(k, l, s)))
        for i, o in enumerate(objects):
            row = [0.0] * nv
            row[n + i], row[-1] = 1.0, -1.0
            a_ub.append(row)
            b_ub.append(-float(o[1] / 2 + o[5]))
        bnds = [(float(lo(i, 0)), float(width - objects[i][0] / 2 - objects[i][3])) for i in range(n)]
        bnds += [(float(lo(i, 1)), None) for i in range(n)] + [(0, None)]
        obj = [0.0] * (nv - 1) + [1.0]
        res = linprog(obj, A_ub=np.array(a_ub), b_ub=np.array(b_ub), bounds=bnds, method="highs")
        if res.status == 0 and (best is None or res.fun < best):
            best = res.fun
    return best


def close_fraction(v: float, den: int = 1000) -> Fraction:
    return Fraction(v).limit_denominator(den)


def is_bounded_lp(rows, n):
    """rows: (coeffs, rhs, is_equality).  Bounded iff every coordinate is bounded both ways."""
    a_ub = [[-float(v) for v in c] for c, _, eq in rows if not eq]
    b_ub = [-float(r) for _, r, eq in rows if not eq]
    a_eq = [[float(v) for v in c] for c, _, eq in rows if eq]
    b_eq = [float(r) for _, r, eq in rows if eq]
    for q in range(n):
        for sgn in (1.0, -1.0):
            obj = [0.0] * n
            obj[q] = sgn
            res = linprog(obj, A_ub=a_ub or None, b_ub=b_ub or None, A_eq=a_eq or None, b_eq=b_eq or None,
                          bounds=[(None, None)] * n, method="highs")
            if res.status == 3:
                return False
    return True
