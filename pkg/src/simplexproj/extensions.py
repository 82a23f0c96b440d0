"""Projections built on the simplex solvers: l1 balls, weighted simplex and
weighted l1 ball, the centered parity polytope, and a mini-batch projected
gradient driver for Lasso."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._validation import as_positive_scalar, as_vector
from .core import (
    ProjectionError,
    SparseProjection,
    WeightedInstance,
    _trusted_instance,
    accurate_cumsum,
)
from .parallel import _map_workers, make_plan
from .serial import condat


@dataclass(frozen=True)
class BallInstance:
    """Input vector (any finite reals) and l1-ball radius."""

    d: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "d", as_vector(self.d, "d"))
        object.__setattr__(self, "b", as_positive_scalar(self.b, "b"))

    @property
    def n(self) -> int:
        return self.d.size


@dataclass(frozen=True)
class SignedProjection:
    """Sparse signed projection result (l1-ball family).

    Interior inputs are flagged and returned unchanged; otherwise values carry
    the signs of the corresponding inputs.
    """

    tau: float
    indices: np.ndarray
    values: np.ndarray
    n: int
    interior: bool = False

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.float64)
        out[self.indices] = self.values
        return out


@dataclass(frozen=True)
class LassoConfig:
    """Mini-batch projected-gradient settings."""

    step: float = 0.05
    batch_size: int = 128
    iterations: int = 10
    radius: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass
class LassoTrace:
    """Final iterate plus per-iteration l1 norms and projection wall times."""

    x: np.ndarray
    l1_norms: list
    projection_ns: list


def _trusted_weighted(d, w, b) -> WeightedInstance:
    inst = object.__new__(WeightedInstance)
    object.__setattr__(inst, "d", d)
    object.__setattr__(inst, "w", w)
    object.__setattr__(inst, "b", b)
    return inst


def project_l1_ball(inst: BallInstance, backend=None) -> SignedProjection:
    """Project onto the l1 ball of radius b.

    Interior inputs come back unchanged; otherwise |d| is projected onto the
    simplex with the chosen backend and the signs are restored (zero entries
    can never activate because the pivot is strictly positive).
    """
    d, b = inst.d, inst.b
    if float(np.sum(np.abs(d))) <= b:
        idx = np.nonzero(d)[0]
        return SignedProjection(tau=0.0, indices=idx, values=d[idx], n=d.size, interior=True)
    if backend is None:
        backend = condat
    proj, _ = backend(_trusted_instance(np.abs(d), b))
    signs = np.where(d[proj.indices] < 0.0, -1.0, 1.0)
    return SignedProjection(
        tau=proj.tau,
        indices=proj.indices,
        values=signs * proj.values,
        n=d.size,
        interior=False,
    )


def _weighted_reconstruct(inst: WeightedInstance, tau: float, tol: float = 1e-9) -> SparseProjection:
    d, w, b = inst.d, inst.w, inst.b
    idx = np.nonzero(d - w * tau > 0.0)[0]
    if idx.size == 0:
        raise ProjectionError(f"weighted pivot {tau!r} leaves no active entries")
    vals = d[idx] - w[idx] * tau
    residual = float(np.sum(w[idx] * vals)) - b
    if abs(residual) > tol * max(1.0, b, abs(tau)):
        raise ProjectionError(
            f"weighted reconstruction from pivot {tau!r} misses the scale by {residual:.3e}"
        )
    return SparseProjection(tau=tau, indices=idx, values=vals)


def weighted_michelot(inst: WeightedInstance):
    """Fixed point of p <- (sum w_i d_i - b)/(sum w_i^2) over candidates with
    d_i/w_i > p.  Returns (tau, sparse projection) with values d_i - w_i*tau."""
    b = inst.b
    z = inst.d / inst.w
    dw = inst.d * inst.w
    w2 = inst.w * inst.w
    while True:
        p = (float(np.sum(dw)) - b) / float(np.sum(w2))
        keep = z > p
        if keep.all():
            break
        z, dw, w2 = z[keep], dw[keep], w2[keep]
    return float(p), _weighted_reconstruct(inst, float(p))


def weighted_filter(inst: WeightedInstance) -> np.ndarray:
    """Weighted single-pass candidate filter; returns a sorted index superset
    of the weighted active set."""
    keep, _, _ = _kernels.weighted_filter_scan(inst.d, inst.w, inst.b)
    keep.sort()
    return keep


def _weighted_condat(inst: WeightedInstance):
    """Weighted filter followed by ratio-test removal passes with running
    numerator/denominator pivot updates."""
    d, w, b = inst.d, inst.w, inst.b
    keep, _, _ = _kernels.weighted_filter_scan(d, w, b)
    dk, wk = d[keep], w[keep]
    swd = float(np.sum(dk * wk))
    sw2 = float(np.sum(wk * wk))
    ds, ws, _, _, _ = _kernels.weighted_ratio_passes(dk, wk, swd, sw2, b)
    tau = (float(np.sum(ds * ws)) - b) / float(np.sum(ws * ws))
    return tau, _weighted_reconstruct(inst, tau)


def _argsort_descending(z: np.ndarray, k: int) -> np.ndarray:
    """Descending stable argsort via chunked sorts and pairwise merges.

    Ties resolve by ascending original index for every k, so the permutation
    is identical to a single stable argsort.
    """
    if k <= 1 or z.size < 2:
        return np.argsort(-z, kind="stable")
    plan = make_plan(z.size, k)
    orders = _map_workers(
        lambda bo: bo[0] + np.argsort(-z[bo[0] : bo[1]], kind="stable"),
        plan.partitions,
        plan.k,
    )

    def merge(pair):
        oa, ob = pair
        if ob is None:
            return oa
        ka, kb = -z[oa], -z[ob]
        out = np.empty(oa.size + ob.size, dtype=np.int64)
        out[np.searchsorted(kb, ka, side="left") + np.arange(oa.size)] = oa
        out[np.searchsorted(ka, kb, side="right") + np.arange(ob.size)] = ob
        return out

    while len(orders) > 1:
        pairs = [
            (orders[i], orders[i + 1]) if i + 1 < len(orders) else (orders[i], None)
            for i in range(0, len(orders), 2)
        ]
        orders = _map_workers(merge, pairs, len(pairs))
    return orders[0]


def weighted_sort_scan_parallel(inst: WeightedInstance, k: int = 1):
    """Sort the ratios d_i/w_i descending, find the largest feasible prefix
    under the weighted pivot test, reconstruct.  k controls sort chunking
    only; the output is identical for every k."""
    d, w, b = inst.d, inst.w, inst.b
    z = d / w
    order = _argsort_descending(z, k)
    zs = z[order]
    cum_dw = accurate_cumsum((d * w)[order])
    cum_w2 = accurate_cumsum((w * w)[order])
    crit = (cum_dw - b) / cum_w2
    hits = np.nonzero(crit <= zs)[0]
    kappa = int(hits[-1]) + 1 if hits.size else inst.n
    tau = float(crit[kappa - 1])
    return tau, _weighted_reconstruct(inst, tau)


def distributed_weighted_project(inst: WeightedInstance, k: int, variant: str = "pivot"):
    """Jointly partition (d, w), project each slice onto the same-scale
    weighted simplex, re-solve the locally active survivors serially."""
    if variant not in ("pivot", "condat"):
        raise ValueError(f"variant must be 'pivot' or 'condat', got {variant!r}")
    local = weighted_michelot if variant == "pivot" else _weighted_condat
    d, w, b = inst.d, inst.w, inst.b
    plan = make_plan(inst.n, k)

    def solve_slice(bounds):
        lo, hi = bounds
        _, proj = local(_trusted_weighted(d[lo:hi], w[lo:hi], b))
        return lo + proj.indices

    survivors = np.concatenate(_map_workers(solve_slice, plan.partitions, plan.k))
    tau, proj_r = local(_trusted_weighted(d[survivors], w[survivors], b))
    return tau, SparseProjection(
        tau=tau, indices=survivors[proj_r.indices], values=proj_r.values
    )


def project_weighted_l1_ball(inst: WeightedInstance, variant: str = "condat") -> SignedProjection:
    """Project onto {v : sum w_i |v_i| <= b}: interior shortcut, otherwise the
    weighted-simplex projection of |d| with signs restored."""
    d, w, b = inst.d, inst.w, inst.b
    if float(np.sum(w * np.abs(d))) <= b:
        idx = np.nonzero(d)[0]
        return SignedProjection(tau=0.0, indices=idx, values=d[idx], n=d.size, interior=True)
    solver = _weighted_condat if variant == "condat" else weighted_michelot
    tau, proj = solver(_trusted_weighted(np.abs(d), w, b))
    signs = np.where(d[proj.indices] < 0.0, -1.0, 1.0)
    return SignedProjection(
        tau=tau, indices=proj.indices, values=signs * proj.values, n=d.size, interior=False
    )


def _odd_flip_pattern(d: np.ndarray) -> np.ndarray:
    """Sign-flip mask: nonnegative coordinates, toggled at the smallest-|d_i|
    coordinate (lowest index on ties) whenever the count would be even."""
    flip = d >= 0.0
    if int(np.count_nonzero(flip)) % 2 == 0:
        i_star = int(np.argmin(np.abs(d)))
        flip[i_star] = ~flip[i_star]
    return flip


def project_parity_polytope(d, backend=None) -> np.ndarray:
    """Project onto the centered parity polytope (the convex hull of the
    even-parity 0/1 vertices, shifted by -1/2 per coordinate).

    Flips signs to an odd pattern nearest the input, answers with the box
    projection when its coordinate sum clears 1 - n/2, and otherwise projects
    the flipped vector onto the shifted unit simplex and un-flips.
    """
    d = as_vector(d, "d")
    n = d.size
    if n < 2:
        raise ValueError("parity polytope projection needs n >= 2")
    flip = _odd_flip_pattern(d)
    v = np.where(flip, -d, d)
    box_v = np.clip(v, -0.5, 0.5)
    if float(np.sum(box_v)) >= 1.0 - n / 2.0:
        return np.clip(d, -0.5, 0.5)
    if backend is None:
        backend = condat
    proj, _ = backend(_trusted_instance(v + 0.5, 1.0))
    y = proj.to_dense(n) - 0.5
    return np.where(flip, -y, y)


def lasso_pgd_minibatch(matrix, labels, cfg: LassoConfig, backend=None, x0=None) -> LassoTrace:
    """Mini-batch projected gradient descent for Lasso with an l1-ball
    projection each iteration.

    Batches of rows are sampled uniformly without replacement (seeded); only
    the projection call is timed.  Iterates after the first projection stay
    inside the ball.
    """
    n_samples, n_features = matrix.shape
    labels = as_vector(labels, "labels")
    if labels.size != n_samples:
        raise ValueError(
            f"label count {labels.size} does not match the {n_samples} design-matrix rows"
        )
    rng = np.random.default_rng(cfg.seed)
    if x0 is None:
        x = np.where(rng.random(n_features) < 0.5, 0.0, rng.uniform(0.0, 1.0, n_features))
    else:
        x = as_vector(x0, "x0").copy()
        if x.size != n_features:
            raise ValueError(f"x0 length {x.size} does not match {n_features} features")

    batch = min(cfg.batch_size, n_samples)
    norms = []
    times = []
    for _ in range(cfg.iterations):
        rows = rng.choice(n_samples, size=batch, replace=False)
        sub = matrix[rows]
        residual = sub @ x - labels[rows]
        grad = 2.0 * (sub.T @ residual)
        y = x - cfg.step * np.asarray(grad).ravel()
        start = time.perf_counter_ns()
        proj = project_l1_ball(BallInstance(y, cfg.radius), backend)
        times.append(time.perf_counter_ns() - start)
        x = proj.to_dense()
        norms.append(float(np.sum(np.abs(x))))
    return LassoTrace(x=x, l1_norms=norms, projection_ns=times)
