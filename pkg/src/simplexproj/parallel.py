"""Sparsity-exploiting distributed preprocessing and parallel solvers.

The decomposition rests on the subvector property: projecting any contiguous
slice onto the same-scale simplex yields a pivot no larger than the full
problem's, so entries inactive in a slice projection are inactive in the full
projection.  Workers therefore project disjoint slices, only locally active
entries survive, and one final serial solve over the survivors finishes the
job.  Local solves run in a thread pool (the hot loops are nogil-compiled or
numpy calls that release the GIL); k logical workers may map to fewer
physical threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import _kernels
from .core import (
    ProjectionInstance,
    SolverStats,
    SparseProjection,
    _trusted_instance,
    reconstruct,
)
from .serial import PivotRule, michelot, pivot_partition

#: Environment variable capping the number of OS threads used per solve.
MAX_THREADS_ENV = "SIMPLEXPROJ_MAX_THREADS"

_DENSE_FALLBACK_FRACTION = 0.9


@dataclass(frozen=True)
class WorkerPlan:
    """k contiguous, disjoint index ranges covering the vector, with sizes
    differing by at most one."""

    k: int
    bounds: np.ndarray  # k + 1 offsets, bounds[i]:bounds[i+1] is range i

    @property
    def partitions(self):
        return [(int(self.bounds[i]), int(self.bounds[i + 1])) for i in range(self.k)]


@dataclass(frozen=True)
class ReducedInstance:
    """Surviving original indices and their values after distributed
    preprocessing; the survivors contain the full active set."""

    indices: np.ndarray
    values: np.ndarray
    b: float
    n: int

    @property
    def size(self) -> int:
        return self.indices.size


def make_plan(n: int, k: int) -> WorkerPlan:
    """Split 1..n into min(k, n) contiguous ranges with sizes differing by at
    most one (the first n mod k ranges take the extra element)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if k < 1:
        raise ValueError("k must be at least 1")
    k = min(k, n)
    base, extra = divmod(n, k)
    sizes = np.full(k, base, dtype=np.int64)
    sizes[:extra] += 1
    bounds = np.concatenate(([0], np.cumsum(sizes)))
    return WorkerPlan(k=k, bounds=bounds)


def thread_budget(k: int) -> int:
    """Physical thread count for k logical workers, capped by the
    SIMPLEXPROJ_MAX_THREADS environment variable and the CPU count."""
    cap = os.environ.get(MAX_THREADS_ENV)
    limit = os.cpu_count() or 1
    if cap is not None:
        try:
            limit = min(limit, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, min(k, limit))


def _map_workers(fn, work_items, k: int):
    """Run fn over work_items, in a thread pool when the budget allows.

    Results are gathered in work-item order, so the reduction is deterministic
    regardless of scheduling.
    """
    workers = thread_budget(k)
    if workers == 1:
        return [fn(item) for item in work_items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, work_items))


def distributed_preprocess(instance: ProjectionInstance, plan: WorkerPlan, local_solver):
    """Project each slice onto the same-scale simplex; keep locally active
    entries.  Returns the surviving entries (a superset of the global active
    set) in ascending original-index order."""
    d, b = instance.d, instance.b

    def solve_slice(bounds):
        lo, hi = bounds
        proj, st = local_solver(_trusted_instance(d[lo:hi], b))
        return lo + proj.indices, st

    results = _map_workers(solve_slice, plan.partitions, plan.k)
    survivors = np.concatenate([idx for idx, _ in results])
    scanned = sum(st.elements_scanned for _, st in results)
    stats = SolverStats(
        elements_scanned=scanned,
        outer_iterations=max(st.outer_iterations for _, st in results),
        reduced_size=survivors.size,
        preprocess_scanned=scanned,
        dense_fallback=survivors.size > _DENSE_FALLBACK_FRACTION * instance.n,
    )
    return ReducedInstance(indices=survivors, values=d[survivors], b=b, n=instance.n), stats


def parallel_pivot_partition(instance: ProjectionInstance, k: int, rule: PivotRule | None = None):
    """Distributed preprocessing with a pivot-based local solver, then one
    serial solve of the reduced instance with the same rule."""
    if rule is None:
        rule = PivotRule.michelot_start()
    plan = make_plan(instance.n, k)
    solver = michelot if rule.kind == "michelot-start" else partial(pivot_partition, rule=rule)
    reduced, pre = distributed_preprocess(instance, plan, solver)
    proj_r, fin = solver(_trusted_instance(reduced.values, reduced.b))
    indices = reduced.indices[proj_r.indices]
    stats = SolverStats(
        elements_scanned=pre.elements_scanned + fin.elements_scanned,
        outer_iterations=fin.outer_iterations,
        reduced_size=reduced.size,
        preprocess_scanned=pre.elements_scanned,
        dense_fallback=pre.dense_fallback,
    )
    return SparseProjection(tau=proj_r.tau, indices=indices, values=proj_r.values), stats


def distributed_filter(instance: ProjectionInstance, plan: WorkerPlan):
    """Per-worker serial filter plus one local removal pass with dynamic
    pivot updates; returns the ascending union of surviving indices (a
    superset of the active set) and stats."""
    d, b = instance.d, instance.b

    def filter_slice(bounds):
        lo, hi = bounds
        local = d[lo:hi]
        keep, _, scanned = _kernels.filter_scan(local, b)
        vals = local[keep]
        p0 = (float(np.sum(vals)) - b) / vals.size
        kept_pos, _ = _kernels.single_cleanup_pass(vals, p0)
        idx = lo + keep[kept_pos]
        idx.sort()
        return idx, scanned + vals.size

    results = _map_workers(filter_slice, plan.partitions, plan.k)
    union = np.concatenate([idx for idx, _ in results])
    scanned = sum(s for _, s in results)
    stats = SolverStats(
        elements_scanned=scanned,
        outer_iterations=1,
        reduced_size=union.size,
        preprocess_scanned=scanned,
        dense_fallback=union.size > _DENSE_FALLBACK_FRACTION * instance.n,
    )
    return union, stats


def parallel_condat(instance: ProjectionInstance, k: int):
    """Distributed filter, then the serial dynamic-pivot main loop over the
    surviving entries (no second filter)."""
    plan = make_plan(instance.n, k)
    union, pre = distributed_filter(instance, plan)
    vals = instance.d[union]
    p0 = (float(np.sum(vals)) - instance.b) / vals.size
    survivors, _, passes, main_scanned = _kernels.pivot_update_passes(vals, p0)
    tau = (float(np.sum(survivors)) - instance.b) / survivors.size
    stats = SolverStats(
        elements_scanned=pre.elements_scanned + main_scanned,
        outer_iterations=passes,
        reduced_size=union.size,
        preprocess_scanned=pre.elements_scanned,
        dense_fallback=pre.dense_fallback,
    )
    return reconstruct(instance, tau), stats


def _merge_sorted(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Merge two ascending arrays (ties: a's elements first)."""
    out = np.empty(a.size + b.size, dtype=a.dtype)
    out[np.searchsorted(b, a, side="left") + np.arange(a.size)] = a
    out[np.searchsorted(a, b, side="right") + np.arange(b.size)] = b
    return out


def _parallel_sort_descending(d: np.ndarray, k: int) -> tuple[np.ndarray, int]:
    """Chunked sort plus pairwise merge rounds; returns (descending array,
    elements touched)."""
    plan = make_plan(d.size, k)
    chunks = _map_workers(lambda bo: np.sort(d[bo[0] : bo[1]]), plan.partitions, plan.k)
    touched = d.size
    while len(chunks) > 1:
        pairs = [
            (chunks[i], chunks[i + 1]) if i + 1 < len(chunks) else (chunks[i], None)
            for i in range(0, len(chunks), 2)
        ]
        chunks = _map_workers(
            lambda ab: ab[0] if ab[1] is None else _merge_sorted(ab[0], ab[1]),
            pairs,
            len(pairs),
        )
        touched += d.size
    return chunks[0][::-1], touched


def parallel_mergesort_partial_scan(instance: ProjectionInstance, k: int):
    """Parallel merge sort, then a doubling prefix scan that exits at the
    first power-of-two block past the active count, refined by bisection.

    The scan stops doubling once (prefix - b)/count >= the sorted value at
    that count, then walks back down rebasing on every feasible probe; the
    result matches sort-and-scan exactly.
    """
    d, b = instance.d, instance.b
    n = instance.n
    dsort, touched = _parallel_sort_descending(d, k)
    stats = SolverStats(elements_scanned=touched, outer_iterations=1)

    if n == 1:
        tau = dsort[0] - b
        stats.elements_scanned += 1
        return reconstruct(instance, tau), stats

    levels = int(math.ceil(math.log2(n)))
    size = 1 << levels
    s = np.zeros(size, dtype=np.float64)
    s[:n] = dsort

    ops = 0
    broke_at = None
    for j in range(1, levels + 1):
        step = 1 << j
        half = step >> 1
        idx = np.arange(step - 1, size, step)
        s[idx] += s[idx - half]
        ops += idx.size
        kappa = min(n, step)
        if (s[step - 1] - b) / kappa >= dsort[kappa - 1]:
            broke_at = j
            break
    stats.elements_scanned += ops

    if broke_at is None:
        # Feasible through the final block: the whole vector is active.
        tau = (s[size - 1] - b) / n
        return reconstruct(instance, tau), stats

    # Bisection refinement: base is the largest known-feasible position
    # (1-based, holds a full prefix in s); probe base + 2^(i-1) downwards.
    base = 1 << (broke_at - 1)
    for i in range(broke_at - 1, 0, -1):
        cand = base + (1 << (i - 1))
        kappa = min(cand, n)
        s[cand - 1] += s[base - 1]
        stats.elements_scanned += 1
        if (s[cand - 1] - b) / kappa < dsort[kappa - 1]:
            base = cand
            if kappa == n:
                break
    kappa = min(base, n)
    tau = (s[base - 1] - b) / kappa
    return reconstruct(instance, tau), stats
