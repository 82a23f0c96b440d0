"""Euclidean projections onto scaled simplices and friends.

Serial solvers (sort-and-scan, pivot-and-partition, Michelot, Condat,
bucket), sparsity-exploiting distributed preprocessing for parallel variants,
l1-ball / weighted / parity-polytope extensions, a Lasso PGD driver, a
benchmark CLI, and scikit-learn style transformers.
"""

from .core import (
    DEFAULT_TOL,
    ProjectionError,
    ProjectionInstance,
    SolverStats,
    SparseProjection,
    WeightedInstance,
    expected_support_bound,
    pivot_fn,
    reconstruct,
    reference_project,
    sparsity_certificate,
    verify_kkt,
)
from .serial import (
    BucketParams,
    PivotRule,
    bucket,
    condat,
    filter_candidates,
    michelot,
    pivot_partition,
    sort_scan,
)
from .parallel import (
    MAX_THREADS_ENV,
    ReducedInstance,
    WorkerPlan,
    distributed_filter,
    distributed_preprocess,
    make_plan,
    parallel_condat,
    parallel_mergesort_partial_scan,
    parallel_pivot_partition,
)
from .extensions import (
    BallInstance,
    LassoConfig,
    LassoTrace,
    SignedProjection,
    distributed_weighted_project,
    lasso_pgd_minibatch,
    project_l1_ball,
    project_parity_polytope,
    project_weighted_l1_ball,
    weighted_filter,
    weighted_michelot,
    weighted_sort_scan_parallel,
)
from .bench import (
    BenchConfig,
    BenchRecord,
    generate_instance,
    read_libsvm,
    run_benchmark,
    speedup_report,
    write_libsvm,
)
from .estimators import (
    L1BallProjection,
    ParityPolytopeProjection,
    SimplexProjection,
    WeightedSimplexProjection,
)

__version__ = "0.1.0"

__all__ = [
    "BallInstance",
    "BenchConfig",
    "BenchRecord",
    "BucketParams",
    "DEFAULT_TOL",
    "L1BallProjection",
    "LassoConfig",
    "LassoTrace",
    "MAX_THREADS_ENV",
    "ParityPolytopeProjection",
    "PivotRule",
    "ProjectionError",
    "ProjectionInstance",
    "ReducedInstance",
    "SignedProjection",
    "SimplexProjection",
    "SolverStats",
    "SparseProjection",
    "WeightedInstance",
    "WeightedSimplexProjection",
    "WorkerPlan",
    "bucket",
    "condat",
    "distributed_filter",
    "distributed_preprocess",
    "distributed_weighted_project",
    "expected_support_bound",
    "filter_candidates",
    "generate_instance",
    "lasso_pgd_minibatch",
    "make_plan",
    "michelot",
    "parallel_condat",
    "parallel_mergesort_partial_scan",
    "parallel_pivot_partition",
    "pivot_fn",
    "pivot_partition",
    "project_l1_ball",
    "project_parity_polytope",
    "project_weighted_l1_ball",
    "read_libsvm",
    "reconstruct",
    "reference_project",
    "run_benchmark",
    "sort_scan",
    "sparsity_certificate",
    "speedup_report",
    "verify_kkt",
    "weighted_filter",
    "weighted_michelot",
    "weighted_sort_scan_parallel",
    "write_libsvm",
]
