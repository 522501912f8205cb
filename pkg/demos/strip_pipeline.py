"""From random instances to solver input files, the way a benchmark run would go.

Generates a few seeded strip packing instances, packs them greedily for an
upper bound, writes LP files with a warm start and branching priorities, and
(if scipy is around) solves the small ones to compare against the greedy
height.  Output goes to ./strip_demo/.
"""
import json
import time
from pathlib import Path

from idealrpp import GenSpec, build_spp, generate, greedy_pack, summarize
from idealrpp.experiments import RunRecord

out = Path("strip_demo")
out.mkdir(exist_ok=True)

try:
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
except ImportError:
    milp = None


def solve(m):
    # rows are stored as a.z >= b or a.z == b; binaries sit after the continuous block
    a = np.array([[float(c) for c in r.coeffs] for r in m.rows])
    lo = np.array([float(r.rhs) for r in m.rows])
    hi = np.array([float(r.rhs) if r.sense == "=" else np.inf for r in m.rows])
    integrality = [0] * m.n_c + [1] * m.n_b
    lb = [-np.inf] * m.n_c + [0] * m.n_b
    ub = [np.inf] * m.n_c + [1] * m.n_b
    res = milp([float(c) for c in m.objective], constraints=LinearConstraint(a, lo, hi),
               integrality=integrality, bounds=Bounds(lb, ub), options={"time_limit": 30})
    return res.fun if res.status == 0 else None


records = []
for k, inst in enumerate(generate(GenSpec(4, strip_width=40, seed=1, n_instances=3))):
    lay = greedy_pack(inst)
    print(f"instance {k}: greedy height {lay.height} in {len(lay.rows)} rows")
    for kind in ("SU", "RU", "SBM"):
        m, side = build_spp(inst, kind, cuts="none", priorities=True, warm=True)
        stem = out / f"i{k}_{kind}"
        stem.with_suffix(".lp").write_text(side.model_text)
        stem.with_suffix(".json").write_text(side.hints_json() + "\n")
        if milp is None:
            continue
        t0 = time.perf_counter()
        h = solve(m)
        dt = time.perf_counter() - t0
        print(f"  {kind:4s} optimum {h:g}  ({dt:.2f}s)")
        records.append(RunRecord(kind, inst.n, runtime=dt))

if records:
    text, _ = summarize(records)
    print()
    print(text)
(out / "records.json").write_text(json.dumps([r.to_json() for r in records], indent=1))
