"""Algorithm id registry shared by the benchmark harness, CLI and estimators."""

from __future__ import annotations

from .core import ProjectionInstance
from .parallel import parallel_condat, parallel_mergesort_partial_scan, parallel_pivot_partition
from .serial import PivotRule, bucket, condat, michelot, pivot_partition, sort_scan

SERIAL_ALGORITHMS = ("sortscan", "pp-median", "pp-random", "michelot", "condat", "bucket")
PARALLEL_ALGORITHMS = ("psortscan", "ppivot", "pcondat")
ALGORITHMS = SERIAL_ALGORITHMS + PARALLEL_ALGORITHMS

#: Serial method timed against each parallel method for relative speedup.
SERIAL_EQUIVALENT = {"psortscan": "sortscan", "ppivot": "michelot", "pcondat": "condat"}

_PARALLEL_FOR = {v: k for k, v in SERIAL_EQUIVALENT.items()}


def resolve(algorithm: str, k: int) -> tuple[str, int]:
    """Validate an (algorithm, worker count) pair, promoting a serial
    algorithm to its distributed counterpart when k > 1."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if k < 1:
        raise ValueError("worker count must be at least 1")
    if k > 1 and algorithm in _PARALLEL_FOR:
        return _PARALLEL_FOR[algorithm], k
    return algorithm, k


def solve(instance: ProjectionInstance, algorithm: str, k: int = 1, seed: int = 0):
    """Run the named algorithm; returns (SparseProjection, SolverStats).

    Serial algorithms ignore k.  The seed feeds the random pivot rule only.
    """
    if algorithm == "sortscan":
        return sort_scan(instance)
    if algorithm == "pp-median":
        return pivot_partition(instance, PivotRule.median())
    if algorithm == "pp-random":
        return pivot_partition(instance, PivotRule.random(seed))
    if algorithm == "michelot":
        return michelot(instance)
    if algorithm == "condat":
        return condat(instance)
    if algorithm == "bucket":
        return bucket(instance)
    if algorithm == "psortscan":
        return parallel_mergesort_partial_scan(instance, k)
    if algorithm == "ppivot":
        return parallel_pivot_partition(instance, k)
    if algorithm == "pcondat":
        return parallel_condat(instance, k)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
