"""Small input-validation helpers shared across the package."""

import numpy as np


def as_vector(x, name="d"):
    """Coerce to a 1-D contiguous float64 array of finite entries."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise ValueError(f"{name} must contain at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def as_positive_scalar(x, name="b"):
    val = float(x)
    if not np.isfinite(val) or val <= 0.0:
        raise ValueError(f"{name} must be a finite positive number, got {x!r}")
    return val


def as_matrix(X, name="X"):
    """Coerce to a 2-D float64 array of finite entries (estimator input)."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        raise ValueError(
            f"{name} must be two-dimensional; reshape a single sample with .reshape(1, -1)"
        )
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr
