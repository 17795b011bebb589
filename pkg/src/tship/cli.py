"""Command-line entry point: ``tship solve|verify|diag|bench|generate``.

Exit codes: 0 on success, 1 on bad input or a failed check, 2 when the
solver hits its iteration caps. Every failure message starts with an error
token (``ImproperDemands:``, ``ParseError:``, ``VerifyFailed:`` ...).
Set ``TSHIP_LOG`` to ``error``, ``info`` or ``debug`` for diagnostics on
standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
import time

import numpy as np

from .approximator import build_approximator
from .boosting import SolveConfig, solve
from .errors import NotConverged, TshipError
from .exact import MAX_N, exact_opt
from .fileio import fmt, parse_flow, read_instance, render_flow, render_report, write_instance
from .generators import make_instance
from .graph import flow_cost, residual, routing_tolerance, validate
from .tzoracle import default_k

log = logging.getLogger("tship")

BENCH_COLUMNS = ["n", "m", "build_time", "apply_P_time", "solve_time", "iterations", "cost", "opt", "ratio"]


def _setup_logging():
    level = os.environ.get("TSHIP_LOG", "error").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.ERROR),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _fail(token: str, msg: str) -> int:
    print(f"{token}: {msg}", file=sys.stderr)
    return 1


def cmd_solve(args) -> int:
    inst = validate(read_instance(args.input))
    config = SolveConfig(eps=args.eps, residual_router=args.residual_router)
    try:
        rep = solve(inst, config)
    except NotConverged as exc:
        print(str(exc), file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(render_flow(rep.flow, rep.cost))
    sys.stdout.write(render_report(rep.summary(), args.report))
    return 0


def cmd_verify(args) -> int:
    inst = validate(read_instance(args.instance))
    with open(args.flow) as fh:
        flow, claimed = parse_flow(fh.read(), inst)
    b = inst.demands
    r = residual(inst, b, flow)
    worst = int(np.argmax(np.abs(r)))
    tol = routing_tolerance(b)
    if abs(r[worst]) > tol:
        return _fail("VerifyFailed", f"conservation violated at vertex {worst + 1} by {fmt(r[worst])} (tolerance {fmt(tol)})")
    cost = flow_cost(flow, inst.cost)
    if claimed is not None and abs(claimed - cost) > 1e-9 * max(1.0, abs(cost)):
        return _fail("VerifyFailed", f"trailer cost {fmt(claimed)} but flow costs {fmt(cost)}")
    print(f"routing ok max_violation {fmt(abs(r[worst]))}")
    print(f"cost {fmt(cost)}")
    if args.eps is not None and inst.n <= MAX_N:
        opt = exact_opt(inst, b).opt
        print(f"opt {fmt(opt)}")
        if cost > (1 + args.eps) * opt + 1e-9 * float(np.abs(b).sum()) * float(inst.cost.max()):
            return _fail("VerifyFailed", f"cost {fmt(cost)} exceeds (1+{args.eps}) x opt {fmt(opt)}")
        print(f"ratio {fmt(cost / opt) if opt > 0 else 'nan'}")
    return 0


def diag_text(inst, what: str) -> str:
    """The text dumped by ``tship diag``."""
    out = io.StringIO()
    apx = build_approximator(inst)
    if what == "layers":
        for i, delta, ni, mi in apx.layers.table():
            out.write(f"layer {i} {delta:.17g} {ni} {mi}\n")
    elif what == "oracle":
        k = default_k(inst.n)
        bound = 8 * k * inst.n ** (1 / k) * math.log(inst.n)
        sizes = np.concatenate([o.bundle_sizes() for o in apx.oracles if o is not None])
        hist = np.bincount(sizes)
        for s in np.flatnonzero(hist).tolist():
            out.write(f"bundle_size {s} count {hist[s]}\n")
        out.write(f"max_bundle_size {int(sizes.max())}\n")
        out.write(f"size_bound {bound:.17g}\n")
    elif what == "approx":
        for key, val in apx.stats().items():
            out.write(f"{key} {fmt(val) if isinstance(val, float) else val}\n")
    else:
        raise ValueError(f"unknown diagnostic {what!r}")
    return out.getvalue()


def cmd_diag(args) -> int:
    inst = validate(read_instance(args.instance))
    sys.stdout.write(diag_text(inst, args.what))
    return 0


def bench_rows(family: str, sizes, eps: float, seed: int, repeats: int = 5):
    """One dict per size with the columns of ``BENCH_COLUMNS``."""
    rows = []
    for n in sizes:
        inst = make_instance(family, n, seed)
        t = time.perf_counter()
        apx = build_approximator(inst)
        build = time.perf_counter() - t
        b = inst.demands
        times = []
        for _ in range(repeats):
            t = time.perf_counter()
            apx.apply_P(b)
            times.append(time.perf_counter() - t)
        t = time.perf_counter()
        rep = solve(inst, SolveConfig(eps=eps), apx)
        solve_time = time.perf_counter() - t
        opt = exact_opt(inst, b).opt if inst.n <= MAX_N else None
        rows.append({
            "n": inst.n,
            "m": inst.m,
            "build_time": build,
            "apply_P_time": min(times),
            "solve_time": solve_time,
            "iterations": rep.iterations,
            "cost": rep.cost,
            "opt": opt,
            "ratio": rep.cost / opt if opt else None,
        })
    return rows


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    rows = bench_rows(args.family, sizes, args.eps, args.seed)
    fh = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in rows:
            w.writerow(["" if r[c] is None else (fmt(r[c]) if isinstance(r[c], float) else r[c]) for c in BENCH_COLUMNS])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_generate(args) -> int:
    inst = make_instance(args.family, args.n, args.seed)
    write_instance(args.out, inst, f"{args.family} n={inst.n} seed={args.seed}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tship", description="Approximate uncapacitated transshipment.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("input")
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--out", help="write the flow file here")
    s.add_argument("--residual-router", choices=["mst", "approximator"], default="mst")
    s.add_argument("--report", choices=["json", "text"], default="text")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a flow file against an instance")
    v.add_argument("instance")
    v.add_argument("flow")
    v.add_argument("--eps", type=float)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("diag", help="dump layer, oracle or approximator diagnostics")
    d.add_argument("instance")
    d.add_argument("what", choices=["layers", "oracle", "approx"])
    d.set_defaults(func=cmd_diag)

    b = sub.add_parser("bench", help="time the pipeline on a generated family")
    b.add_argument("--family", choices=["path", "grid", "cycle", "random"], default="path")
    b.add_argument("--sizes", default="100,200,400")
    b.add_argument("--eps", type=float, default=0.25)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("generate", help="write a generated instance file")
    g.add_argument("--family", choices=["path", "grid", "cycle", "random"], default="random")
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TshipError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except OSError as exc:
        return _fail("IOError", str(exc))


if __name__ == "__main__":
    sys.exit(main())
