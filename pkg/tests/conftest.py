"""Shared fixtures and independent oracles for the test suite.

The oracles deliberately avoid the library's sort-and-scan route: simplex and
weighted pivots come from root finding on the monotone mass function, and the
parity-polytope projection from active-set enumeration over the hull vertices.
"""

import itertools

import numpy as np
import pytest
from scipy.optimize import brentq

import simplexproj as sp


def bisection_tau(d, b):
    """Pivot via brentq on g(t) = sum(max(d_i - t, 0)) - b (strictly
    decreasing through its root)."""
    d = np.asarray(d, dtype=np.float64)

    def g(t):
        return float(np.sum(np.maximum(d - t, 0.0))) - b

    lo = float(d.min()) - b - 1.0
    hi = float(d.max())
    if g(hi) == 0.0:
        return hi
    return brentq(g, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200)


def weighted_bisection_tau(d, w, b):
    """Weighted pivot via brentq on sum(w_i * max(d_i - w_i t, 0)) - b."""
    d = np.asarray(d, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)

    def g(t):
        return float(np.sum(w * np.maximum(d - w * t, 0.0))) - b

    lo = float((d / w).min()) - b / float(np.min(w * w)) - 1.0
    hi = float((d / w).max())
    if g(hi) == 0.0:
        return hi
    return brentq(g, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200)


def parity_vertices(n):
    """Centered even-parity hypercube vertices, one per row."""
    verts = [v for v in itertools.product((0.0, 1.0), repeat=n) if int(sum(v)) % 2 == 0]
    return np.asarray(verts) - 0.5


def hull_projection(vertices, d):
    """Projection of d onto conv(vertices) by enumerating support sets and
    solving each equality-constrained least-squares subproblem exactly."""
    m = vertices.shape[0]
    best = None
    best_dist = np.inf
    for r in range(1, m + 1):
        for support in itertools.combinations(range(m), r):
            V = vertices[list(support)].T  # n x r
            k = len(support)
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = V.T @ V
            kkt[:k, k] = 1.0
            kkt[k, :k] = 1.0
            rhs = np.concatenate([V.T @ d, [1.0]])
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            lam = sol[:k]
            if np.any(lam < -1e-9) or abs(lam.sum() - 1.0) > 1e-9:
                continue
            x = V @ lam
            dist = float(np.linalg.norm(x - d))
            if dist < best_dist - 1e-15:
                best_dist = dist
                best = x
    return best


def check_weighted_kkt(inst, tau, proj, tol=1e-9):
    """Weighted optimality: mass balance, value formula, excluded-ratio test."""
    d, w, b = inst.d, inst.w, inst.b
    idx, vals = proj.indices, proj.values
    assert abs(float(np.sum(w[idx] * vals)) - b) <= tol * max(1.0, b)
    assert np.all(np.abs(vals - (d[idx] - w[idx] * tau)) <= tol)
    excluded = np.ones(d.size, dtype=bool)
    excluded[idx] = False
    assert np.all(d[excluded] / w[excluded] <= tau + tol)


def make_vector(rng, n, dist):
    """Random test vector from a named distribution family."""
    if dist == "uniform":
        return rng.uniform(0.0, 1.0, n)
    if dist == "normal":
        return rng.normal(0.0, 1.0, n)
    if dist == "constant":
        return np.full(n, rng.uniform(-5.0, 5.0))
    if dist == "duplicates":
        pool = rng.uniform(0.0, 1.0, max(2, n // 10))
        return rng.choice(pool, n)
    if dist == "sorted":
        return np.sort(rng.uniform(0.0, 1.0, n))
    if dist == "reverse-sorted":
        return np.sort(rng.uniform(0.0, 1.0, n))[::-1].copy()
    raise ValueError(dist)


DISTS = ("uniform", "normal", "constant", "duplicates", "sorted", "reverse-sorted")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Compile the numba kernels once so timings and deadlines stay honest."""
    inst = sp.ProjectionInstance(d=np.linspace(0.0, 1.0, 32), b=1.0)
    sp.condat(inst)
    sp.parallel_condat(inst, 2)
    wi = sp.WeightedInstance(d=np.linspace(0.1, 1.0, 16), w=np.full(16, 1.0), b=1.0)
    sp.weighted_michelot(wi)
    sp.distributed_weighted_project(wi, 2, "condat")
