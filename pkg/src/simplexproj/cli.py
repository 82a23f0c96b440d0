"""Command-line interface: single projections, benchmark campaigns, the Lasso
driver, and speedup reports.

Worker threads are capped by the SIMPLEXPROJ_MAX_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ._registry import ALGORITHMS, resolve, solve
from .bench import (
    BenchConfig,
    generate_instance,
    read_libsvm,
    read_records,
    report_to_csv,
    report_to_text,
    run_benchmark,
    speedup_report,
)
from .core import WeightedInstance, verify_kkt
from .extensions import (
    BallInstance,
    LassoConfig,
    distributed_weighted_project,
    lasso_pgd_minibatch,
    project_l1_ball,
    project_parity_polytope,
    project_weighted_l1_ball,
    weighted_michelot,
    weighted_sort_scan_parallel,
)

_WEIGHTED_DISPATCH = {
    "michelot": lambda inst, k: weighted_michelot(inst),
    "condat": lambda inst, k: distributed_weighted_project(inst, 1, "condat"),
    "sortscan": lambda inst, k: weighted_sort_scan_parallel(inst, 1),
    "psortscan": lambda inst, k: weighted_sort_scan_parallel(inst, k),
    "ppivot": lambda inst, k: distributed_weighted_project(inst, k, "pivot"),
    "pcondat": lambda inst, k: distributed_weighted_project(inst, k, "condat"),
}


def _cmd_project(args) -> int:
    instance = generate_instance(args.dist, args.n, args.seed, args.b)
    d = instance.d

    if args.parity:
        start = time.perf_counter_ns()
        out = project_parity_polytope(d)
        elapsed = time.perf_counter_ns() - start
        print(
            f"parity n={args.n} time_ms={elapsed / 1e6:.3f} "
            f"sum={out.sum():.6g} min={out.min():.6g} max={out.max():.6g}"
        )
        return 0

    if args.weighted:
        w = np.loadtxt(args.weighted, dtype=np.float64).ravel()
        inst = WeightedInstance(d=d, w=w, b=args.b)
        if args.l1:
            start = time.perf_counter_ns()
            proj = project_weighted_l1_ball(inst)
            elapsed = time.perf_counter_ns() - start
            state = "interior" if proj.interior else f"tau={proj.tau:.12g}"
            print(
                f"weighted-l1 n={args.n} time_ms={elapsed / 1e6:.3f} "
                f"{state} nnz={proj.indices.size}"
            )
            return 0
        if args.alg not in _WEIGHTED_DISPATCH:
            print(f"error: algorithm {args.alg!r} has no weighted variant", file=sys.stderr)
            return 2
        start = time.perf_counter_ns()
        tau, proj = _WEIGHTED_DISPATCH[args.alg](inst, args.k)
        elapsed = time.perf_counter_ns() - start
        print(
            f"weighted-{args.alg} n={args.n} k={args.k} time_ms={elapsed / 1e6:.3f} "
            f"tau={tau:.12g} nnz={proj.indices.size}"
        )
        return 0

    if args.l1:
        alg, k = resolve(args.alg, args.k)
        backend = lambda inst: solve(inst, alg, k=k, seed=args.seed)
        start = time.perf_counter_ns()
        proj = project_l1_ball(BallInstance(d, args.b), backend)
        elapsed = time.perf_counter_ns() - start
        state = "interior" if proj.interior else f"tau={proj.tau:.12g}"
        print(
            f"l1[{alg}] n={args.n} time_ms={elapsed / 1e6:.3f} "
            f"{state} nnz={proj.indices.size}"
        )
        return 0

    start = time.perf_counter_ns()
    proj, stats = solve(instance, args.alg, k=args.k, seed=args.seed)
    elapsed = time.perf_counter_ns() - start
    ok = verify_kkt(instance, proj, 1e-9)
    reduced = "" if stats.reduced_size is None else f" reduced={stats.reduced_size}"
    print(
        f"{args.alg} n={args.n} k={args.k} time_ms={elapsed / 1e6:.3f} "
        f"tau={proj.tau:.12g} nnz={proj.indices.size}{reduced} kkt={'ok' if ok else 'FAIL'}"
    )
    return 0 if ok else 1


def _cmd_bench(args) -> int:
    with open(args.config, "rb") as fh:
        raw = tomllib.load(fh)
    cfg = BenchConfig(
        algorithms=tuple(raw.get("algorithms", ["condat"])),
        n=int(raw["n"]),
        dist=str(raw.get("dist", "uniform(0,1)")),
        b=float(raw.get("b", 1.0)),
        ks=tuple(int(k) for k in raw.get("ks", [1])),
        trials=int(raw.get("trials", 1)),
        seed=int(raw.get("seed", 0)),
        out=args.out or raw.get("out"),
    )
    records = run_benchmark(cfg)
    if cfg.out:
        print(f"wrote {len(records)} records to {cfg.out}")
    else:
        for r in records:
            print(f"{r.algorithm},{r.n},{r.dist},{r.b:g},{r.k},{r.trial},{r.time_ns},"
                  f"{'' if r.reduced_size is None else r.reduced_size},{r.tau:.12g}")
    return 0


def _cmd_lasso(args) -> int:
    matrix, labels = read_libsvm(args.data)
    cfg = LassoConfig(
        step=args.alpha,
        batch_size=args.batch,
        iterations=args.iters,
        radius=args.b,
        seed=args.seed,
    )
    alg, k = resolve(args.alg, args.k)
    backend = lambda inst: solve(inst, alg, k=k, seed=args.seed)
    trace = lasso_pgd_minibatch(matrix, labels, cfg, backend)
    for i, (norm, ns) in enumerate(zip(trace.l1_norms, trace.projection_ns), start=1):
        print(f"iter={i} proj_ms={ns / 1e6:.3f} l1={norm:.6g}")
    print(f"final nnz={int(np.count_nonzero(trace.x))} of {trace.x.size}")
    return 0


def _cmd_report(args) -> int:
    records = read_records(args.input)
    rows = speedup_report(records, baseline=args.baseline)
    print(report_to_text(rows))
    if args.out:
        report_to_csv(rows, args.out)
        print(f"wrote report to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simplexproj",
        description="Simplex, l1-ball, weighted and parity-polytope projections with a benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="generate one instance and project it")
    p.add_argument("--alg", choices=ALGORITHMS, default="condat")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dist", default="uniform(0,1)")
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weighted", metavar="WFILE", help="weight vector file (one float per line)")
    p.add_argument("--l1", action="store_true", help="project onto the l1 ball instead")
    p.add_argument("--parity", action="store_true", help="project onto the centered parity polytope")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("bench", help="run a benchmark campaign from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV output path (overrides the config)")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("lasso", help="mini-batch projected-gradient Lasso on LIBSVM data")
    p.add_argument("--data", required=True, metavar="FILE.libsvm")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alg", choices=ALGORITHMS, default="condat")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_lasso)

    p = sub.add_parser("report", help="speedup table from a benchmark CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--baseline", choices=["fastest-serial", "same-algorithm-serial"],
                   default="fastest-serial")
    p.add_argument("--out", help="also write the table as CSV")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
