"""Command line entry point.

Exit codes: 0 success (or Ideal), 3 not ideal, 1 failed check or bad data,
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import experiments as ex
from .formulations import KINDS, build, normalize_kind
from .idealness import (EmptyRelaxation, UnboundedRelaxation, big_m_bound, build_iom, build_separation,
                        augmented, check_ideal, slack_bound, spark_circuits)
from .lemmas import LEMMAS, ConditionNotMet, LemmaSpec, lemma_covers, verify_lemma
from .mblp import compose_relaxation
from .rational import rat_str
from .rpp import RppInstance, TrivialInstance

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NOT_IDEAL = 3


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _instance(path: str) -> RppInstance:
    with open(path) as fh:
        return RppInstance.from_json(json.load(fh))


def _pair(text: str | None):
    if text is None:
        return None
    a, b = (int(v) - 1 for v in text.split(","))
    return (a, b)


def _model(args):
    inst = _instance(args.instance)
    return inst, build(args.kind, inst, pair=_pair(args.pair), force=args.force)


def _workers(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return 1


def verdict_artifacts(kind: str, verdict) -> tuple[str | None, str]:
    """Witness text (None when ideal) and report text for a verdict, byte-stable."""
    rep = verdict.report
    summary = {
        "kind": normalize_kind(kind),
        "ideal": verdict.ideal,
        "vertices": len(rep.vertices),
        "fractional": len(rep.fractional),
        "subsets_examined": rep.subsets_examined,
        "subsets_rank_deficient": rep.subsets_rank_deficient,
        "bounded": rep.bounded,
        "points": [[rat_str(v) for v in p.z] for p in rep.points],
    }
    wit = None if verdict.ideal else _dump(verdict.witness.to_json(verdict.relaxation))
    return wit, _dump(summary)


def cmd_check_ideal(args) -> int:
    _, m = _model(args)
    verdict = check_ideal(m, workers=_workers(args))
    wit, report = verdict_artifacts(args.kind, verdict)
    if args.report:
        _write(args.report, report)
    n_vert = len(verdict.report.vertices)
    if wit is None:
        print(f"{normalize_kind(args.kind)}: ideal ({n_vert} vertices, all binary parts integral)")
        return EXIT_OK
    _write(args.out, wit)
    print(f"{normalize_kind(args.kind)}: not ideal; witness with penalty "
          f"{rat_str(verdict.witness.phi_value)} written to {args.out}")
    return EXIT_NOT_IDEAL


def cmd_witness(args) -> int:
    _, m = _model(args)
    verdict = check_ideal(m, workers=_workers(args))
    if verdict.ideal:
        print("no fractional vertex", file=sys.stderr)
        return EXIT_OK
    if args.all:
        relax = verdict.relaxation
        wits = sorted(verdict.report.fractional, key=lambda w: (-w.phi_value, w.point.z))
        _write(args.out, _dump([w.to_json(relax) for w in wits]))
    else:
        _write(args.out, _dump(verdict.witness.to_json(verdict.relaxation)))
    return EXIT_NOT_IDEAL


def cmd_circuits(args) -> int:
    _, m = _model(args)
    verdict = check_ideal(m, workers=_workers(args))
    if verdict.ideal:
        print("no fractional vertex, nothing to explain", file=sys.stderr)
        return EXIT_OK
    relax = verdict.relaxation
    rows = list(verdict.witness.tight_all)
    circuits = spark_circuits(augmented(relax, rows), row_cap=args.row_cap)
    out = [{"rows": [relax.rows[rows[q]].tag.label() for q in c.rows],
            "multipliers": [rat_str(v) for v in c.multipliers]} for c in circuits]
    _write(args.out, _dump({"tight": [relax.rows[i].tag.label() for i in rows], "circuits": out}))
    return EXIT_OK


def cmd_build_iom(args) -> int:
    inst, m = _model(args)
    relax = compose_relaxation(m)
    covers = lemma_covers(normalize_kind(args.kind), inst, _pair(args.pair) or (0, 1)) if args.covers == "lemma" else []
    if args.big_m == "slack":
        big_m = slack_bound(relax)
    elif args.big_m == "remark":
        big_m = big_m_bound(relax)
    else:
        big_m = args.big_m
    iom = build_iom(relax, covers, big_m=big_m)
    _write(args.out, ex.export(iom.iom, args.format))
    if args.separation:
        sep = build_separation(augmented(relax, range(len(relax.rows))), big_m)
        Path(args.separation).write_text(ex.export(sep.milp, args.format))
    return EXIT_OK


def cmd_verify_lemmas(args) -> int:
    inst = _instance(args.instance)
    spec = LemmaSpec(args.lemma, tuple(args.items) if args.items else None, _pair(args.pair) or (0, 1))
    report = verify_lemma(spec, inst)
    for ident, res in report.items.items():
        print(f"{ident:12s} {res.status}")
    if args.out:
        _write(args.out, report.dumps() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_gen(args) -> int:
    spec = ex.GenSpec(args.n, strip_width=args.width, seed=args.seed, n_instances=args.count)
    insts = ex.generate(spec)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for k, inst in enumerate(insts):
            Path(args.out_dir, f"n{args.n}_s{args.seed}_{k:03d}.json").write_text(inst.dumps() + "\n")
    else:
        _write(None, _dump([inst.to_json() for inst in insts]))
    return EXIT_OK


def cmd_greedy(args) -> int:
    inst = _instance(args.instance)
    layout = ex.greedy_pack(inst)
    _write(args.out, _dump(layout.to_json()))
    return EXIT_OK


def cmd_export(args) -> int:
    inst = _instance(args.instance)
    m, sx = ex.build_spp(inst, args.kind, cuts=args.cuts, priorities=args.priorities, warm=args.warm,
                         fmt=args.format)
    _write(args.out, sx.model_text)
    if args.hints:
        Path(args.hints).write_text(sx.hints_json() + "\n")
    return EXIT_OK


def cmd_summarize(args) -> int:
    with open(args.records) as fh:
        records = [ex.RunRecord.from_json(r) for r in json.load(fh)]
    text, table = ex.summarize(records)
    _write(None, text)
    if args.json:
        Path(args.json).write_text(_dump(table))
    return EXIT_OK


def _kind(text: str) -> str:
    try:
        return normalize_kind(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idealrpp", description="Exact idealness checks for rectangle packing models.")
    p.add_argument("--threads", type=int, default=None, help="worker processes for vertex enumeration")
    sub = p.add_subparsers(dest="command", required=True)

    def model_args(sp):
        sp.add_argument("--kind", required=True, type=_kind, help="one of " + ", ".join(KINDS))
        sp.add_argument("--instance", required=True)
        sp.add_argument("--pair", help="1-based object pair, e.g. 1,2")
        sp.add_argument("--force", action="store_true", help="build even when the instance is trivial")

    sp = sub.add_parser("check-ideal", help="enumerate vertices and decide idealness")
    model_args(sp)
    sp.add_argument("--out", default="witness.json")
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_check_ideal)

    sp = sub.add_parser("witness", help="print the fractional witness")
    model_args(sp)
    sp.add_argument("--all", action="store_true", help="every fractional vertex, largest penalty first")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("circuits", help="minimal dependent subsets of the witness's tight rows")
    model_args(sp)
    sp.add_argument("--row-cap", type=int, default=24)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_circuits)

    sp = sub.add_parser("build-iom", help="export the vertex-penalty MILP")
    model_args(sp)
    sp.add_argument("--covers", choices=("lemma", "none"), default="lemma")
    sp.add_argument("--big-m", default="slack", help="a number, 'slack' or 'remark'")
    sp.add_argument("--format", choices=("lp", "mps"), default="lp")
    sp.add_argument("--separation", help="also write the separation MILP over all rows here")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_build_iom)

    sp = sub.add_parser("verify-lemmas", help="rank checks of the dependence covers")
    sp.add_argument("--lemma", required=True, type=str.upper, choices=LEMMAS)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--items", nargs="*")
    sp.add_argument("--pair")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify_lemmas)

    sp = sub.add_parser("gen", help="seeded strip-packing instances")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--width", default="100")
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("greedy", help="greedy shelf layout")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_greedy)

    sp = sub.add_parser("export", help="strip-packing model as LP or MPS")
    sp.add_argument("--kind", required=True, type=_kind)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--format", choices=("lp", "mps"), default="lp")
    sp.add_argument("--cuts", choices=ex.CUTS, default="none")
    sp.add_argument("--priorities", action="store_true")
    sp.add_argument("--warm", action="store_true")
    sp.add_argument("--hints", help="write priorities, start point and height bound here")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("summarize", help="tabulate run records")
    sp.add_argument("--records", required=True)
    sp.add_argument("--json")
    sp.set_defaults(func=cmd_summarize)
    return p


def run(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        return args.func(args)
    except (TrivialInstance, ConditionNotMet, EmptyRelaxation, UnboundedRelaxation, ValueError,
            OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())
