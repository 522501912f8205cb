import json
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from scipy_helpers import close_fraction, solve_model, spp_height_lp

from idealrpp.experiments import (MAX_MARK, MIN_MARK, GenSpec, NonRepresentable, ObjectTooWide, RunRecord,
                                  beta25_cdf, beta25_quantile, build_spp, export, fmt_number, generate,
                                  generate_one, greedy_pack, layout_height, layout_point, spp_optimum_bruteforce,
                                  summarize, validate_layout)
from idealrpp.formulations import KINDS, UNARY, build
from idealrpp.mblp import ConstraintTag, MblpModel, is_feasible, make_row
from idealrpp.rpp import RppInstance, RppObject, TrivialInstance, pair_instance

GOLDEN = Path(__file__).parent / "golden"


def one_row_model():
    return MblpModel(1, 1, [make_row([1, 2], F(3, 2), ">=", ConstraintTag("R", (1,)))], ["x", "y"],
                     objective=(1, 0), name="one")


# generation

def test_generated_sizes_in_range():
    for inst in generate(GenSpec(10, seed=3, n_instances=5)):
        assert inst.n == 10
        for o in inst.objects:
            assert all(5 <= d <= 30 and d.denominator == 1 for d in o.d)
            assert all(0 <= s <= o.d[k % 2] and (s * 100).denominator == 1 for k, s in enumerate(o.sigma))
        assert inst.r("x") == 100


def test_generation_is_deterministic_and_order_free():
    a = generate(GenSpec(10, seed=11, n_instances=4))
    b = generate(GenSpec(10, seed=11, n_instances=4))
    assert a == b
    assert generate_one(GenSpec(10, seed=11), 3) == a[3]
    assert generate(GenSpec(10, seed=12, n_instances=1))[0] != a[0]


def test_clearance_probability_extremes():
    none = generate_one(GenSpec(20, seed=1, clearance_prob=0), 0)
    assert all(s == 0 for o in none.objects for s in o.sigma)
    every = generate_one(GenSpec(20, seed=1, clearance_prob=1), 0)
    assert sum(s > 0 for o in every.objects for s in o.sigma) > 70


def test_beta_table_shape():
    assert beta25_cdf(F(0)) == 0 and beta25_cdf(F(1)) == 1
    assert beta25_quantile(F(0)) == 0 and beta25_quantile(F(1)) == 1
    # the mode of Beta(2, 5) is 1/5, so small sizes dominate
    sizes = [o.d[0] for inst in generate(GenSpec(25, seed=5, n_instances=8)) for o in inst.objects]
    assert sum(sizes) / len(sizes) < F(35, 2)


@given(st.fractions(0, 1, max_denominator=1000), st.fractions(0, 1, max_denominator=1000))
def test_quantile_is_monotone(u, v):
    if u <= v:
        assert beta25_quantile(u) <= beta25_quantile(v)


def test_bad_spec_rejected():
    with pytest.raises(ValueError):
        GenSpec(0)
    with pytest.raises(ValueError):
        GenSpec(3, size_range=(5, 200))


# greedy layouts

def test_single_object_layout():
    inst = RppInstance((100, 10), (RppObject((2, 2)),))
    lay = greedy_pack(inst)
    assert lay.centers == ((1, 1),) and lay.height == 2


def test_wide_objects_wrap():
    inst = RppInstance((100, 40), (RppObject((60, 5)), RppObject((50, 5))))
    lay = greedy_pack(inst)
    assert len(lay.rows) == 2
    assert lay.centers[1][1] > lay.centers[0][1]


def test_top_clearance_pushes_next_row_up():
    low = RppObject((60, 4), (0, 0, 0, 3))
    tall = RppObject((50, 8))
    lay = greedy_pack(RppInstance((100, 40), (low, tall)))
    # the second row starts above the 3-unit clearance, not the physical top
    assert lay.rows[0].members == (0,)
    assert lay.rows[1].base == 4 + 3
    assert lay.centers[1][1] == 7 + 4


def test_too_wide_object():
    with pytest.raises(ObjectTooWide):
        greedy_pack(RppInstance((10, 10), (RppObject((8, 2), (2, 0, 1, 0)),)))


def test_clearance_overlap_is_a_violation():
    inst = pair_instance((2, 2), (2, 2), (10, 10), (0, 0, 2, 0), (0, 0, 0, 0))
    # object 2 sits inside object 1's right clearance
    bad = validate_layout(inst, [(1, 1), (4, 1)])
    assert [v.kind for v in bad] == ["overlap"]


def test_touching_clearances_are_fine():
    inst = pair_instance((2, 2), (2, 2), (10, 10), (0, 0, 2, 0), (2, 0, 0, 0))
    assert validate_layout(inst, [(1, 1), (5, 1)]) == []
    assert [v.kind for v in validate_layout(inst, [(1, 1), (F(9, 2), 1)])] == ["overlap"]


def test_out_of_region_is_a_violation():
    inst = pair_instance((2, 2), (2, 2), (10, 10))
    bad = validate_layout(inst, [(0, 1), (5, 1)])
    assert bad and bad[0].kind == "bounds" and bad[0].direction == "x"


@pytest.mark.parametrize("n", [10, 15, 20, 25])
def test_greedy_layouts_validate(n):
    for inst in generate(GenSpec(n, seed=99, n_instances=25)):
        lay = greedy_pack(inst)
        assert validate_layout(inst.with_region(ry=lay.height), lay.centers) == []
        assert layout_height(inst, lay.centers) == lay.height


# strip packing models

def test_single_object_strip():
    inst = RppInstance((100, 10), (RppObject((2, 2)),))
    for kind in KINDS:
        m, _ = build_spp(inst, kind)
        assert solve_model(m) == pytest.approx(2)
    assert spp_optimum_bruteforce(inst) == 2


def test_pair_strip_rows():
    inst = pair_instance((3, 2), (4, 5), (20, 30))
    m, sx = build_spp(inst, "SU", warm=True, priorities=True)
    assert sum(r.tag.family == "SPP:h" for r in m.rows) == 2
    base = build("SU", inst)
    assert sum(r.tag.family.startswith("SU:") for r in m.rows) == len(base.rows)
    h = greedy_pack(inst)
    assert sx.hints["bound_ry"] == str(h.height)
    assert sx.hints["start"]["c_1_x"] == str(h.centers[0][0])
    assert set(sx.hints["priorities"]) == set(m.var_names[m.n_c:])


@pytest.mark.parametrize("kind", KINDS)
def test_warm_start_is_feasible(kind):
    for seed in range(8):
        inst = generate_one(GenSpec(4, seed=seed), 0)
        m, sx = build_spp(inst, kind, warm=True)
        start = [F(sx.hints["start"][v]) for v in m.var_names]
        assert is_feasible(m, start)


def test_trivial_strip_rejected():
    with pytest.raises(TrivialInstance):
        build_spp(pair_instance((2, 2), (2, 2), (10, 0)), "SU")


def test_cut_kind_mismatch_rejected():
    inst = generate_one(GenSpec(3, seed=0), 0)
    with pytest.raises(ValueError):
        build_spp(inst, "SBL", cuts="spu")


def _oracle_tuple(o):
    return (o.d[0], o.d[1], o.sigma[0], o.sigma[2], o.sigma[1], o.sigma[3])


@pytest.mark.parametrize("n", [2, 3])
def test_bruteforce_matches_independent_lp_oracle(n):
    for seed in range(8):
        inst = generate_one(GenSpec(n, strip_width=45, seed=seed), 0)
        got = spp_optimum_bruteforce(inst)
        ref = spp_height_lp([_oracle_tuple(o) for o in inst.objects], inst.r("x"))
        assert close_fraction(ref) == got


@pytest.mark.parametrize("kind", KINDS)
def test_model_optimum_matches_bruteforce(kind):
    for seed in range(4):
        for n in (2, 3):
            inst = generate_one(GenSpec(n, strip_width=45, seed=seed), 0)
            cuts = "none" if n == 2 else ("spu" if kind in UNARY else "spb")
            m, _ = build_spp(inst, kind, cuts=cuts)
            assert close_fraction(solve_model(m)) == spp_optimum_bruteforce(inst)


# export

def test_golden_one_row_files():
    m = one_row_model()
    assert export(m, "lp") == (GOLDEN / "one_row.lp").read_text()
    assert export(m, "mps") == (GOLDEN / "one_row.mps").read_text()


def test_non_terminating_values_are_scaled():
    m = MblpModel(1, 0, [make_row([F(1, 3)], 1, ">=", ConstraintTag("R"))], ["x"], name="third")
    text = export(m, "lp")
    assert "\\ row R scaled by 3" in text
    assert " R: 1 x >= 3" in text
    with pytest.raises(NonRepresentable):
        fmt_number(F(1, 3))
    assert fmt_number(F(-7, 4)) == "-1.75"


def test_standard_unary_pair_export_rows():
    text = export(build("SU", pair_instance((2, 2), (2, 2), (10, 10))), "lp")
    body = text.split("Subject To\n")[1].split("Bounds\n")[0]
    assert len(body.strip().splitlines()) == 13


@pytest.mark.parametrize("fmt", ["lp", "mps"])
def test_export_is_stable_and_injective(fmt):
    inst = generate_one(GenSpec(3, seed=4), 0)
    texts = {}
    for kind in KINDS:
        a = export(build(kind, inst, force=True), fmt)
        assert a == export(build(kind, inst, force=True), fmt)
        texts[kind] = a
    assert len(set(texts.values())) == len(KINDS)
    m = one_row_model()
    tweaked = MblpModel(1, 1, [make_row([1, 2], F(7, 4), ">=", ConstraintTag("R", (1,)))], ["x", "y"],
                        objective=(1, 0), name="one")
    assert export(m, fmt) != export(tweaked, fmt)


def test_unknown_format():
    with pytest.raises(ValueError):
        export(one_row_model(), "xml")


# run summaries

def test_empty_summary():
    assert summarize([]) == ("", {"columns": [], "rows": []})


def test_single_converged_record():
    text, table = summarize([RunRecord("SU", 10, runtime=12.34)])
    assert table["rows"][0]["cells"] == {"SU": "12.3s"}
    assert "12.3s" in text


def test_mixed_records_mark_best_and_worst():
    recs = [RunRecord("SU", 10, runtime=3.0), RunRecord("RU", 10, runtime=1.5),
            RunRecord("SBL", 10, gap=4.5), RunRecord("SU", 15, {"cuts": True}, gap=2.0)]
    text, table = summarize(recs)
    row = table["rows"][0]
    assert row["cells"]["RU"] == "1.5s" + MIN_MARK
    assert row["cells"]["SBL"] == "4.5%" + MAX_MARK
    assert row["cells"]["SU"] == "3.0s"
    assert table["rows"][1]["flags"] == "cuts" and table["rows"][1]["cells"]["RU"] == "-"
    assert table["columns"] == ["SU", "RU", "SBL"]


def test_record_round_trip_and_validation():
    r = RunRecord("HU", 20, {"priorities": True}, gap=1.25, nodes=10)
    assert RunRecord.from_json(json.loads(json.dumps(r.to_json()))) == r
    with pytest.raises(ValueError):
        RunRecord("HU", 20)
    with pytest.raises(ValueError):
        RunRecord("HU", 20, runtime=1.0, gap=1.0)
    with pytest.raises(ValueError):
        RunRecord("HU", 20, gap=-1.0)


def test_layout_point_matches_model_order():
    inst = generate_one(GenSpec(3, seed=2), 0)
    m, _ = build_spp(inst, "SBM")
    lay = greedy_pack(inst)
    z = layout_point("SBM", inst.with_region(ry=lay.height), lay.centers, m)
    assert len(z) == m.n and is_feasible(m, z)
