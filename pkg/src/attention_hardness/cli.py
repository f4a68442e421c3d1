"""Command-line front end: verification sweeps, single decisions and benchmarks.

Exit codes: 0 on success, 1 when a verification sweep (or a decision)
disagrees with the brute-force oracle, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bench
from .errors import AttentionHardnessError
from .gadgets import HardnessVariant, evaluate, problem_kind
from .problems import (bhfp_to_bhcp, generate, load_instance, oracle, ovp_to_bhfp, ovp_to_tvpp,
                       pair_dots, pair_sqdists)

SEED_ENV = "ATTENTION_HARDNESS_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw not in (None, "") else 0


def _common(sub: bool) -> argparse.ArgumentParser:
    # subcommand copies use SUPPRESS so they only override when given
    dflt = (lambda v: argparse.SUPPRESS) if sub else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=dflt(None),
                   help=f"random seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--out", type=Path, default=dflt(None), help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=dflt("json"), dest="fmt")
    return p


def _variant_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", required=True, help="mechanism:mode, e.g. exp_dot:exact")
    p.add_argument("--mu", default=None, help="error budget, a number or 1-1/n^x")
    p.add_argument("--window", type=int, default=None, help="window width for sliding_window")


def build_parser() -> argparse.ArgumentParser:
    shared = _common(sub=True)
    ap = argparse.ArgumentParser(prog="attention-hardness", parents=[_common(sub=False)],
                                 description=__doc__.splitlines()[0])
    cmds = ap.add_subparsers(dest="command", required=True)

    verify = cmds.add_parser("verify", help="oracle-agreement sweeps").add_subparsers(dest="target", required=True)
    red = verify.add_parser("reductions", parents=[shared], help="OVP -> TVPP and OVP -> BHFP -> BHCP")
    red.add_argument("--trials", type=int, default=1000)
    red.add_argument("--max-n", type=int, default=16)
    red.add_argument("--max-d", type=int, default=10)
    gad = verify.add_parser("gadgets", parents=[shared], help="attention decisions against the oracle")
    _variant_args(gad)
    gad.add_argument("--trials", type=int, default=200, help="instances per planted answer")
    gad.add_argument("--max-n", type=int, default=32)
    gad.add_argument("--max-d", type=int, default=8)
    gad.add_argument("--adversary", choices=("worst_case", "random", "none"), default="worst_case")

    dec = cmds.add_parser("decide", parents=[shared], help="decide one instance file")
    dec.add_argument("--instance", type=Path, required=True)
    _variant_args(dec)
    dec.add_argument("--adversary", choices=("worst_case", "random", "none"), default="none")
    dec.add_argument("--path", choices=("log", "raw"), default="log")

    b = cmds.add_parser("bench", help="benchmarks").add_subparsers(dest="target", required=True)
    sc = b.add_parser("scaling", parents=[shared], help="timing and op counts versus n")
    sc.add_argument("--kernel", choices=bench.KERNELS, required=True)
    sc.add_argument("--sizes", required=True, help="comma-separated ascending sequence lengths")
    sc.add_argument("--d", type=int, default=8)
    sc.add_argument("--p", type=int, default=2)
    sc.add_argument("--reps", type=int, default=3)
    tay = b.add_parser("taylor", parents=[shared], help="Taylor surrogate error versus order")
    tay.add_argument("--p-max", type=int, default=10)
    tay.add_argument("--C", type=float, default=1.0, dest="temperature")
    tay.add_argument("--n", type=int, default=16)
    tay.add_argument("--d", type=int, default=4)
    tay.add_argument("--input-scale", type=float, default=None)
    return ap


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        args.out.write_text(text if text.endswith("\n") else text + "\n")


def _rows_out(args, rows: list[dict]) -> None:
    if args.fmt == "json":
        _emit(args, json.dumps(rows, indent=1))
        return
    import csv
    import io
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _emit(args, buf.getvalue())


def _verify_reductions(args) -> int:
    rng = np.random.default_rng(args.seed)
    bad = 0
    for _ in range(args.trials):
        n = int(rng.integers(1, args.max_n + 1))
        d = int(rng.integers(1, args.max_d + 1))
        inst = generate("OVP", n, d, planted=str(rng.choice(["yes", "random"])), seed=rng)
        tv, bf = ovp_to_tvpp(inst), ovp_to_bhfp(inst)
        bc = bhfp_to_bhcp(bf)
        dots = pair_dots(inst.A, inst.B)
        ok = (oracle(inst) == oracle(tv) == oracle(bc)
              and (pair_dots(tv.A, tv.B) == d - dots).all()
              and (pair_sqdists(bf.A, bf.B) == 2 * d - 2 * dots).all()
              and (pair_sqdists(bc.A, bc.B) == bf.d - pair_sqdists(bf.A, bf.B)).all())
        bad += not ok
    _rows_out(args, [{"check": "reductions", "trials": args.trials, "disagreements": bad}])
    return 1 if bad else 0


def _parse_variant(args) -> HardnessVariant:
    return HardnessVariant.parse(args.variant, args.mu, args.window)


def _verify_gadgets(args) -> int:
    variant = _parse_variant(args)
    kind = problem_kind(variant)
    rng = np.random.default_rng(args.seed)
    adversary = None if args.adversary == "none" else args.adversary
    bad = total = 0
    for planted in ("yes", "no"):
        for _ in range(args.trials):
            n = int(rng.integers(2, args.max_n + 1))
            d = int(rng.integers(1, args.max_d + 1))
            t = int(rng.integers(1, d + 1))
            inst = generate(kind, n, d, t, planted, seed=rng)
            report = evaluate(inst, variant, adversary=adversary, seed=rng)
            total += 1
            bad += not report.oracle_agreement
    _rows_out(args, [{"check": "gadgets", "variant": variant.label, "mu": args.mu or 0,
                      "instances": total, "disagreements": bad}])
    return 1 if bad else 0


def _decide(args) -> int:
    inst = load_instance(args.instance)
    variant = _parse_variant(args)
    adversary = None if args.adversary == "none" else args.adversary
    report = evaluate(inst, variant, adversary=adversary, seed=args.seed, path=args.path)
    _rows_out(args, [report.to_dict()]) if args.fmt == "csv" else _emit(args, json.dumps(report.to_dict(), indent=1))
    return 0 if report.oracle_agreement else 1


def _bench_scaling(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    records = bench.run_scaling(args.kernel, sizes, args.d, args.p, args.reps, args.seed)
    _emit(args, bench.emit_csv(records) if args.fmt == "csv" else bench.emit_json(records))
    for metric in ("op_count", "mean_seconds"):
        fit = bench.fit_exponent(records, metric)
        print(f"{metric} slope {fit.slope:.3f} (r^2 {fit.r_squared:.4f})", file=sys.stderr)
    return 0


def _bench_taylor(args) -> int:
    rows = [{"p": p, "max_abs_error": err} for p, err in
            bench.taylor_sweep(args.p_max, args.temperature, args.n, args.d, args.input_scale, args.seed)]
    _rows_out(args, rows)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.seed is None:
        args.seed = _default_seed()
    handler = {("verify", "reductions"): _verify_reductions, ("verify", "gadgets"): _verify_gadgets,
               ("decide", None): _decide, ("bench", "scaling"): _bench_scaling,
               ("bench", "taylor"): _bench_taylor}[(args.command, getattr(args, "target", None))]
    try:
        return handler(args)
    except (AttentionHardnessError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
