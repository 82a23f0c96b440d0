"""Benchmark harness: instance generation, LIBSVM ingestion, timed trials
with verified results, CSV records and speedup reporting."""

from __future__ import annotations

import csv
import re
import time
from dataclasses import dataclass
from statistics import median

import numpy as np
import scipy.sparse as sp

from ._registry import ALGORITHMS, SERIAL_ALGORITHMS, SERIAL_EQUIVALENT, solve
from .core import ProjectionInstance, verify_kkt

CSV_COLUMNS = ["algorithm", "n", "dist", "b", "k", "trial", "time_ns", "reduced_size", "tau"]

_DIST_RE = re.compile(r"^\s*([a-zA-Z\-]+)\s*\(([^)]*)\)\s*$")


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark campaign: algorithms x worker counts x trials on a fixed
    instance family."""

    algorithms: tuple
    n: int
    dist: str
    b: float = 1.0
    ks: tuple = (1,)
    trials: int = 1
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if any(k < 1 for k in self.ks):
            raise ValueError("worker counts must be at least 1")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {alg!r}")
        parse_distribution(self.dist)  # fail fast on a bad spec


@dataclass(frozen=True)
class BenchRecord:
    """One timed trial."""

    algorithm: str
    n: int
    dist: str
    b: float
    k: int
    trial: int
    time_ns: int
    reduced_size: int | None
    tau: float

    def __post_init__(self):
        if self.time_ns <= 0:
            raise ValueError("wall time must be positive")


def parse_distribution(spec: str):
    """Parse 'uniform(l,u)' | 'normal(mu,var)' | 'sparse-uniform(rate)' into
    (canonical name, sampler(rng, n))."""
    m = _DIST_RE.match(spec)
    if not m:
        raise ValueError(
            f"bad distribution spec {spec!r}; expected uniform(l,u), normal(mu,var) "
            "or sparse-uniform(rate)"
        )
    name = m.group(1).lower()
    try:
        args = [float(tok) for tok in m.group(2).split(",")] if m.group(2).strip() else []
    except ValueError as exc:
        raise ValueError(f"bad distribution parameters in {spec!r}") from exc

    if name == "uniform":
        if len(args) != 2 or args[1] <= args[0]:
            raise ValueError(f"uniform needs (l,u) with u > l, got {spec!r}")
        lo, hi = args
        return f"uniform({lo:g},{hi:g})", lambda rng, n: rng.uniform(lo, hi, n)
    if name == "normal":
        if len(args) != 2 or args[1] <= 0:
            raise ValueError(f"normal needs (mu,var) with var > 0, got {spec!r}")
        mu, var = args
        sig = float(np.sqrt(var))
        return f"normal({mu:g},{var:g})", lambda rng, n: rng.normal(mu, sig, n)
    if name == "sparse-uniform":
        if len(args) != 1 or not 0.0 <= args[0] <= 1.0:
            raise ValueError(f"sparse-uniform needs a rate in [0,1], got {spec!r}")
        rate = args[0]
        return (
            f"sparse-uniform({rate:g})",
            lambda rng, n: np.where(rng.random(n) < rate, 0.0, rng.uniform(0.0, 1.0, n)),
        )
    raise ValueError(f"unknown distribution {name!r} in {spec!r}")


def generate_instance(spec: str, n: int, seed: int, b: float = 1.0) -> ProjectionInstance:
    """Deterministic instance from a distribution spec and seed."""
    _, sampler = parse_distribution(spec)
    rng = np.random.default_rng(seed)
    return ProjectionInstance(d=sampler(rng, n), b=b)


def read_libsvm(path, n_features: int | None = None):
    """Read LIBSVM text (label then 1-based index:value pairs per line).

    Returns (CSR design matrix, label vector).  The largest feature index
    defines the column count unless n_features overrides it.  Malformed lines
    raise with their line number; an empty file is an error.
    """
    labels = []
    rows, cols, vals = [], [], []
    max_col = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split()
            try:
                labels.append(float(tokens[0]))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: bad label {tokens[0]!r}") from exc
            row = len(labels) - 1
            for tok in tokens[1:]:
                idx_s, _, val_s = tok.partition(":")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError as exc:
                    raise ValueError(f"{path}: line {lineno}: bad feature {tok!r}") from exc
                if idx < 1:
                    raise ValueError(f"{path}: line {lineno}: feature index {idx} is not 1-based")
                rows.append(row)
                cols.append(idx - 1)
                vals.append(val)
                max_col = max(max_col, idx)
    if not labels:
        raise ValueError(f"{path}: empty LIBSVM file")
    ncols = n_features if n_features is not None else max_col
    if max_col > ncols:
        raise ValueError(f"{path}: feature index {max_col} exceeds n_features={ncols}")
    matrix = sp.csr_matrix(
        (vals, (rows, cols)), shape=(len(labels), ncols), dtype=np.float64
    )
    return matrix, np.asarray(labels, dtype=np.float64)


def write_libsvm(path, matrix, labels) -> None:
    """Write a (matrix, labels) pair in LIBSVM text format (1-based indices)."""
    matrix = sp.csr_matrix(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        for row in range(matrix.shape[0]):
            lo, hi = matrix.indptr[row], matrix.indptr[row + 1]
            feats = " ".join(
                f"{matrix.indices[j] + 1}:{matrix.data[j]:.17g}" for j in range(lo, hi)
            )
            fh.write(f"{labels[row]:.17g} {feats}".rstrip() + "\n")


def _warmup(algorithm: str) -> None:
    """One tiny untimed solve so JIT compilation never lands in a record."""
    inst = ProjectionInstance(d=np.linspace(0.0, 1.0, 64), b=1.0)
    solve(inst, algorithm, k=2)


def run_benchmark(cfg: BenchConfig):
    """Run every (algorithm, k, trial) cell; each solve is KKT-verified before
    its record is kept.  Timing covers the solve only (partitioning and
    reduction included; generation, warmup and verification excluded)."""
    records = []
    for algorithm in cfg.algorithms:
        _warmup(algorithm)
        ks = cfg.ks if algorithm not in SERIAL_ALGORITHMS else (1,)
        for k in ks:
            for trial in range(cfg.trials):
                instance = generate_instance(cfg.dist, cfg.n, cfg.seed + trial, cfg.b)
                start = time.perf_counter_ns()
                proj, stats = solve(instance, algorithm, k=k, seed=cfg.seed)
                elapsed = time.perf_counter_ns() - start
                if not verify_kkt(instance, proj, 1e-9):
                    raise RuntimeError(
                        f"solver output failed verification: algorithm={algorithm} "
                        f"seed={cfg.seed + trial} k={k}"
                    )
                records.append(
                    BenchRecord(
                        algorithm=algorithm,
                        n=cfg.n,
                        dist=cfg.dist,
                        b=cfg.b,
                        k=k,
                        trial=trial,
                        time_ns=max(1, elapsed),
                        reduced_size=stats.reduced_size,
                        tau=proj.tau,
                    )
                )
    records.sort(key=lambda r: (r.algorithm, r.k, r.trial))
    if cfg.out:
        write_records(cfg.out, records)
    return records


def write_records(path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.algorithm,
                    r.n,
                    r.dist,
                    f"{r.b:.17g}",
                    r.k,
                    r.trial,
                    r.time_ns,
                    "" if r.reduced_size is None else r.reduced_size,
                    f"{r.tau:.17g}",
                ]
            )


def read_records(path):
    records = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected CSV header {reader.fieldnames}")
        for row in reader:
            records.append(
                BenchRecord(
                    algorithm=row["algorithm"],
                    n=int(row["n"]),
                    dist=row["dist"],
                    b=float(row["b"]),
                    k=int(row["k"]),
                    trial=int(row["trial"]),
                    time_ns=int(row["time_ns"]),
                    reduced_size=int(row["reduced_size"]) if row["reduced_size"] else None,
                    tau=float(row["tau"]),
                )
            )
    return records


@dataclass(frozen=True)
class ReportRow:
    algorithm: str
    k: int
    median_ns: float
    absolute_speedup: float
    relative_speedup: float


def speedup_report(records, baseline: str = "fastest-serial"):
    """Median-of-trials per (algorithm, k) with absolute and relative speedups.

    Absolute speedup compares against the fastest serial median (or, with
    baseline='same-algorithm-serial', against the method's own serial
    equivalent); relative speedup always compares against the serial
    equivalent.  Missing baselines are an error.
    """
    if baseline not in ("fastest-serial", "same-algorithm-serial"):
        raise ValueError(f"unknown baseline {baseline!r}")
    groups = {}
    for r in records:
        groups.setdefault((r.algorithm, r.k), []).append(r.time_ns)
    medians = {key: float(median(times)) for key, times in groups.items()}

    serial_medians = {
        alg: medians[(alg, k)] for (alg, k) in medians if alg in SERIAL_ALGORITHMS
    }
    if not serial_medians:
        raise ValueError("records contain no serial baselines (k=1 serial algorithms)")
    fastest_serial = min(serial_medians.values())

    rows = []
    for (alg, k) in sorted(medians):
        med = medians[(alg, k)]
        equivalent = SERIAL_EQUIVALENT.get(alg, alg)
        if equivalent not in serial_medians:
            raise ValueError(
                f"missing serial baseline {equivalent!r} needed for {alg!r}"
            )
        relative = serial_medians[equivalent] / med
        if baseline == "fastest-serial":
            absolute = fastest_serial / med
        else:
            absolute = relative
        rows.append(
            ReportRow(
                algorithm=alg,
                k=k,
                median_ns=med,
                absolute_speedup=absolute,
                relative_speedup=relative,
            )
        )
    return rows


def report_to_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "k", "median_ns", "absolute_speedup", "relative_speedup"])
        for r in rows:
            writer.writerow(
                [r.algorithm, r.k, f"{r.median_ns:.0f}", f"{r.absolute_speedup:.4f}", f"{r.relative_speedup:.4f}"]
            )


def report_to_text(rows) -> str:
    header = f"{'algorithm':<12} {'k':>3} {'median_ms':>12} {'absolute':>9} {'relative':>9}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.algorithm:<12} {r.k:>3} {r.median_ns / 1e6:>12.3f} "
            f"{r.absolute_speedup:>9.3f} {r.relative_speedup:>9.3f}"
        )
    return "\n".join(lines)
