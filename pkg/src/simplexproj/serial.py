"""Serial simplex-projection algorithms, instrumented with SolverStats.

All solvers return the exact projection (the bucket method within its
configured pivot tolerance) in sparse form, together with work counters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._validation import as_positive_scalar, as_vector
from .core import (
    ProjectionInstance,
    SolverStats,
    SparseProjection,
    reconstruct,
    sorted_scan_pivot,
)

_RULE_KINDS = ("random", "median", "michelot-start")


@dataclass(frozen=True)
class PivotRule:
    """Pivot-selection strategy for the partition-based solver."""

    kind: str
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in _RULE_KINDS:
            raise ValueError(f"unknown pivot rule {self.kind!r}; expected one of {_RULE_KINDS}")
        if self.kind == "random" and self.seed is None:
            raise ValueError("the random pivot rule requires a seed for reproducibility")

    @classmethod
    def random(cls, seed: int) -> "PivotRule":
        return cls("random", int(seed))

    @classmethod
    def median(cls) -> "PivotRule":
        return cls("median")

    @classmethod
    def michelot_start(cls) -> "PivotRule":
        return cls("michelot-start")


@dataclass(frozen=True)
class BucketParams:
    """Bucket-method tuning: branching factor c >= 2 and absolute pivot
    tolerance.  A None tolerance resolves to 1e-9 * max(1, range(d)) at solve
    time."""

    branching: int = 64
    pivot_tol: float | None = None

    def __post_init__(self):
        if self.branching < 2:
            raise ValueError("branching factor must be at least 2")
        if self.pivot_tol is not None and self.pivot_tol <= 0:
            raise ValueError("pivot tolerance must be positive")


def sort_scan(instance: ProjectionInstance, kind: str = "quicksort"):
    """Sort descending, scan prefix means for the active count, reconstruct.

    Same contract as the reference oracle; the sort strategy is configurable
    (any numpy sort kind).
    """
    d_sorted = np.sort(instance.d, kind=kind)[::-1]
    tau, kappa = sorted_scan_pivot(d_sorted, instance.b)
    stats = SolverStats(elements_scanned=2 * instance.n, outer_iterations=1)
    return reconstruct(instance, tau), stats


def pivot_partition(instance: ProjectionInstance, rule: PivotRule):
    """Binary search on the pivot with value partitioning.

    Each round picks a pivot among the candidate values.  If the pivot
    residual is negative (pivot above the optimum) every candidate at or
    above it is provably active and gets locked; otherwise every candidate at
    or below it is provably inactive and is dropped.  Terminates with the
    exact active set regardless of duplicates.
    """
    if rule.kind == "michelot-start":
        return michelot(instance)

    b = instance.b
    v = instance.d
    rng = np.random.default_rng(rule.seed) if rule.kind == "random" else None
    locked_sum = 0.0
    locked_cnt = 0
    stats = SolverStats()
    while v.size:
        stats.outer_iterations += 1
        stats.elements_scanned += v.size
        if rule.kind == "random":
            p = v[rng.integers(v.size)]
        else:
            mid = (v.size - 1) // 2
            p = np.partition(v, mid)[mid]
        upper = v >= p
        upper_sum = float(np.sum(v[upper]))
        upper_cnt = int(np.count_nonzero(upper))
        residual = (locked_sum + upper_sum) - (locked_cnt + upper_cnt) * p - b
        if residual < 0.0:
            locked_sum += upper_sum
            locked_cnt += upper_cnt
            v = v[~upper]
        else:
            v = v[v > p]
    tau = (locked_sum - b) / locked_cnt
    return reconstruct(instance, tau), stats


def michelot(instance: ProjectionInstance):
    """Iterate p <- (sum of candidates - b)/count, keep candidates above p,
    until the set stabilizes.  The pivot sequence is non-decreasing and
    converges to the optimum from below."""
    b = instance.b
    v = instance.d
    pivots = []
    sizes = []
    stats = SolverStats()
    while True:
        sizes.append(v.size)
        stats.elements_scanned += v.size
        p = (float(np.sum(v)) - b) / v.size
        pivots.append(p)
        keep = v > p
        if keep.all():
            break
        v = v[keep]
    stats.outer_iterations = len(pivots)
    stats.pivots = pivots
    stats.pass_sizes = sizes
    return reconstruct(instance, pivots[-1]), stats


def filter_candidates(d, b):
    """Single-pass candidate filter (with one waiting-list pass).

    Returns (sorted candidate index array, pivot, stats).  The pivot is
    sandwiched between mean(d) - b/n and the optimal pivot, and the index set
    contains the full active set.
    """
    d = as_vector(d, "d")
    b = as_positive_scalar(b, "b")
    keep, p, scanned = _kernels.filter_scan(d, b)
    keep.sort()
    stats = SolverStats(
        elements_scanned=scanned,
        outer_iterations=1,
        reduced_size=keep.size,
    )
    return keep, float(p), stats


def condat(instance: ProjectionInstance):
    """Filter, then removal passes with in-pass dynamic pivot updates.

    The post-filter scan count never exceeds Michelot's on the same instance;
    stats.preprocess_scanned isolates the filter cost.
    """
    d, b = instance.d, instance.b
    keep, _, filter_scanned = _kernels.filter_scan(d, b)
    vals = d[keep]
    p0 = (float(np.sum(vals)) - b) / vals.size
    survivors, _, passes, main_scanned = _kernels.pivot_update_passes(vals, p0)
    tau = (float(np.sum(survivors)) - b) / survivors.size
    stats = SolverStats(
        elements_scanned=filter_scanned + main_scanned,
        outer_iterations=passes,
        reduced_size=keep.size,
        preprocess_scanned=filter_scanned,
    )
    return reconstruct(instance, tau), stats


def bucket(instance: ProjectionInstance, params: BucketParams | None = None):
    """Multi-pivot bucketing rounds narrowing the pivot to an absolute
    tolerance, then an exact pivot recomputed from the identified active set.

    Each round bands the candidates into c value buckets; whole buckets are
    locked as active or recursed into, shrinking the candidate range by a
    factor c, for at most ceil(log_c(range/tol)) rounds.
    """
    if params is None:
        params = BucketParams()
    d, b = instance.d, instance.b
    n = instance.n
    c = params.branching

    lo = float(d.min())
    hi = float(d.max())
    span = hi - lo
    stats = SolverStats()
    if span == 0.0:
        # All entries equal: closed form, every entry active.
        tau = d[0] - b / n
        stats.elements_scanned = n
        stats.outer_iterations = 1
        return reconstruct(instance, tau), stats

    tol = params.pivot_tol if params.pivot_tol is not None else 1e-9 * max(1.0, span)
    rounds = max(1, int(math.ceil(math.log(span / tol, c)))) if span > tol else 1

    v = d
    locked_sum = 0.0
    locked_cnt = 0
    for _ in range(rounds):
        if v.size == 0:
            break
        mn = float(v.min())
        mx = float(v.max())
        stats.outer_iterations += 1
        stats.elements_scanned += v.size
        if mx == mn:
            # Remaining candidates identical: active as a block or not at all.
            block = (locked_sum + float(np.sum(v)) - b) / (locked_cnt + v.size)
            if block < mx:
                locked_sum += float(np.sum(v))
                locked_cnt += v.size
            v = v[:0]
            break
        # Band j holds values in [edge_j, edge_{j-1}) with edge_j descending.
        frac = (v - mn) / (mx - mn)
        bands = c - np.floor(frac * c).astype(np.int64)
        np.clip(bands, 1, c, out=bands)
        sums = np.bincount(bands, weights=v, minlength=c + 1)
        cnts = np.bincount(bands, minlength=c + 1)
        maxs = np.full(c + 2, -np.inf)
        np.maximum.at(maxs, bands, v)
        # Suffix maxima: largest value strictly below band j.
        below_max = np.full(c + 2, -np.inf)
        for j in range(c, 0, -1):
            below_max[j] = max(below_max[j + 1], maxs[j + 1]) if j < c else -np.inf
        recursed = False
        for j in range(1, c + 1):
            edge = (mx - mn) * (c - j) / c + mn
            p = (locked_sum + sums[j] - b) / (locked_cnt + cnts[j])
            if p >= edge:
                v = v[bands == j]
                recursed = True
                break
            if j < c and p > below_max[j]:
                locked_sum += sums[j]
                locked_cnt += cnts[j]
                v = v[:0]
                break
            locked_sum += sums[j]
            locked_cnt += cnts[j]
        if not recursed and v.size:
            v = v[:0]

    if locked_cnt:
        tau_bar = (locked_sum - b) / locked_cnt
    else:
        tau_bar = (locked_sum + float(np.sum(v)) - b) / (locked_cnt + v.size)

    # Exact pivot from the active set the tolerance-level pivot identifies.
    active = d > tau_bar
    if not active.any():
        active = d == hi
    tau = (float(np.sum(d[active])) - b) / int(np.count_nonzero(active))
    return reconstruct(instance, tau), stats
