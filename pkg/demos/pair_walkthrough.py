"""Check every formulation on one two-object instance and show what goes wrong.

Run with ``python demos/pair_walkthrough.py``.  Takes a few seconds; the
hybrid model is the slowest since its relaxation has the most rows.
"""
from idealrpp import KINDS, build, check_ideal, pair_instance, spark_circuits
from idealrpp.idealness import augmented
from idealrpp.rational import rat_str

# two 2x2 squares in a 10x10 region, no clearances
inst = pair_instance((2, 2), (2, 2), (10, 10))

print(f"{'kind':5s} {'rows':>4s} {'vertices':>8s}  verdict")
witnesses = {}
for kind in KINDS:
    m = build(kind, inst)
    v = check_ideal(m)
    n_vert = len(v.report.vertices)
    if v.ideal:
        print(f"{kind:5s} {len(m.rows):4d} {n_vert:8d}  ideal")
    else:
        witnesses[kind] = v
        print(f"{kind:5s} {len(m.rows):4d} {n_vert:8d}  fractional vertex, penalty {rat_str(v.witness.phi_value)}")

for kind, v in witnesses.items():
    relax = v.relaxation
    names = relax.model.var_names
    z = v.witness.point.z
    frac = {names[relax.n_c + i]: rat_str(val) for i, val in enumerate(z[relax.n_c:]) if val.denominator != 1}
    print(f"\n{kind}: fractional binaries {frac}")
    rows = list(v.witness.tight_all)
    circuits = spark_circuits(augmented(relax, rows))
    if circuits:
        smallest = min(circuits, key=lambda c: len(c.rows))
        print("  smallest dependent set of tight rows:",
              ", ".join(relax.rows[rows[q]].tag.label() for q in smallest.rows))
