"""Numba kernels for the sequential scan loops.

These are the only data-dependent sequential passes in the package; they are
compiled nogil so thread-pool workers can run them concurrently on disjoint
slices.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def filter_scan(d, b):
    """One forward pass with a waiting list, then one pass over the waiting
    list.  Returns (candidate indices, pivot, elements scanned).

    The pivot always equals (sum of kept entries - b) / count, maintained
    incrementally; it never decreases, ends sandwiched between mean(d) - b/n
    and the optimal pivot, and the returned indices are a superset of the
    active set.
    """
    n = d.size
    keep = np.empty(n, np.int64)
    wait = np.empty(n, np.int64)
    nk = 1
    nw = 0
    keep[0] = 0
    p = d[0] - b
    for i in range(1, n):
        x = d[i]
        if x > p:
            p += (x - p) / (nk + 1)
            if p > x - b:
                keep[nk] = i
                nk += 1
            else:
                for j in range(nk):
                    wait[nw + j] = keep[j]
                nw += nk
                keep[0] = i
                nk = 1
                p = x - b
    for j in range(nw):
        i = wait[j]
        x = d[i]
        if x > p:
            keep[nk] = i
            nk += 1
            p += (x - p) / nk
    return keep[:nk].copy(), p, n + nw


@njit(cache=True, nogil=True)
def pivot_update_passes(v0, p):
    """Removal passes with in-pass dynamic pivot updates.

    Starting from candidates v0 and a pivot p = (sum(v0) - b)/len(v0), each
    pass drops entries at or below the current pivot and bumps the pivot by
    (p - x)/|remaining| per removal, until a pass removes nothing.  Returns
    (survivors, pivot, passes, elements scanned).
    """
    v = v0.copy()
    size = v.size
    scanned = 0
    passes = 0
    while True:
        passes += 1
        scanned += size
        cur = size
        w = 0
        for r in range(size):
            x = v[r]
            if x > p:
                v[w] = x
                w += 1
            else:
                cur -= 1
                p += (p - x) / cur
        removed = size - w
        size = w
        if removed == 0:
            break
    return v[:size].copy(), p, passes, scanned


@njit(cache=True, nogil=True)
def single_cleanup_pass(vals, p):
    """One removal pass with dynamic pivot updates (worker-local cleanup).

    Returns (kept positions into vals, pivot).  The divisor is the candidate
    count after each removal, so the pivot stays the exact running mean
    adjustment.
    """
    m = vals.size
    out = np.empty(m, np.int64)
    w = 0
    cur = m
    for r in range(m):
        x = vals[r]
        if x > p:
            out[w] = r
            w += 1
        else:
            cur -= 1
            p += (p - x) / cur
    return out[:w].copy(), p


@njit(cache=True, nogil=True)
def weighted_filter_scan(d, w, b):
    """Weighted analogue of filter_scan using ratios d_i/w_i and the weighted
    pivot (sum w_i d_i - b) / (sum w_i^2)."""
    n = d.size
    keep = np.empty(n, np.int64)
    wait = np.empty(n, np.int64)
    nk = 1
    nw = 0
    keep[0] = 0
    swd = w[0] * d[0]
    sw2 = w[0] * w[0]
    p = (swd - b) / sw2
    for i in range(1, n):
        wi = w[i]
        wd = wi * d[i]
        w2 = wi * wi
        if d[i] / wi > p:
            cand = (swd + wd - b) / (sw2 + w2)
            if cand > (wd - b) / w2:
                keep[nk] = i
                nk += 1
                swd += wd
                sw2 += w2
                p = cand
            else:
                for j in range(nk):
                    wait[nw + j] = keep[j]
                nw += nk
                keep[0] = i
                nk = 1
                swd = wd
                sw2 = w2
                p = (swd - b) / sw2
    for j in range(nw):
        i = wait[j]
        if d[i] / w[i] > p:
            keep[nk] = i
            nk += 1
            swd += w[i] * d[i]
            sw2 += w[i] * w[i]
            p = (swd - b) / sw2
    return keep[:nk].copy(), p, n + nw


@njit(cache=True, nogil=True)
def weighted_ratio_passes(d0, w0, swd, sw2, b):
    """Weighted removal passes: drop entries with d_i/w_i <= p, keeping
    p = (sum w_i d_i - b)/(sum w_i^2) via running numerator/denominator.

    Returns (kept d, kept w, pivot, passes, elements scanned).
    """
    d = d0.copy()
    w = w0.copy()
    size = d.size
    p = (swd - b) / sw2
    passes = 0
    scanned = 0
    while True:
        passes += 1
        scanned += size
        wr = 0
        removed = 0
        for r in range(size):
            if d[r] / w[r] > p:
                d[wr] = d[r]
                w[wr] = w[r]
                wr += 1
            else:
                swd -= w[r] * d[r]
                sw2 -= w[r] * w[r]
                p = (swd - b) / sw2
                removed += 1
        size = wr
        if removed == 0:
            break
    return d[:size].copy(), w[:size].copy(), p, passes, scanned
