"""Exploratory: is the refined unary model still ideal when the strict conditions fail?

With clearance-derived margins the strict lower/upper conditions always hold
for objects of positive size, so this sweep draws random pairs and then
shrinks their precedence margins by hand.  It keeps the pairs where every
term still fits but some term misses a strict condition, and prints the
verdict for each. Nothing is asserted.
``python demos/ru_sweep.py [count] [seed]``
"""
import random
import sys
from fractions import Fraction

from idealrpp import RppInstance, build, check_ideal, classify, derive_params, pair_instance
from idealrpp.rational import rat_str

count = int(sys.argv[1]) if len(sys.argv) > 1 else 12
rng = random.Random(int(sys.argv[2]) if len(sys.argv) > 2 else 0)

seen = ideal = 0
while seen < count:
    dims = [(rng.randint(1, 4), rng.randint(1, 4)) for _ in range(2)]
    sig = [tuple(Fraction(rng.choice((0, 1, 2, 4)), 2) for _ in range(4)) for _ in range(2)]
    base = pair_instance(dims[0], dims[1], (rng.randint(5, 10), rng.randint(5, 10)), sig[0], sig[1])
    # margins anywhere between a quarter of the derived value and the derived value
    prm = derive_params(base)
    over = {key: p * rng.randint(1, 4) / 4 for key, p in prm.P.items()}
    inst = RppInstance(base.region, base.objects, over)
    c = classify(inst)
    if not c.su_hypothesis or c.ru_hypothesis:
        continue
    seen += 1
    missed = [f"{k + 1}{l + 1}{s}" for (k, l, s), t in c.terms.items() if not (t.strict_lb and t.strict_ub)]
    v = check_ideal(build("RU", inst))
    ideal += v.ideal
    verdict = "ideal" if v.ideal else f"fractional, penalty {rat_str(v.witness.phi_value)}"
    print(f"dims {dims}  region {inst.r('x')}x{inst.r('y')}  non-strict {missed}: {verdict}", flush=True)

print(f"\n{ideal}/{seen} ideal")
