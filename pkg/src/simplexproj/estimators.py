"""scikit-learn style transformers wrapping the projection solvers.

The projections are stateless row-wise transforms, so fit only validates and
records the feature count (the same idiom as sklearn's Normalizer); they
compose with Pipeline, clone and get_params/set_params.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._registry import resolve as _resolve
from ._registry import solve
from ._validation import as_matrix, as_vector
from .core import ProjectionInstance, WeightedInstance
from .extensions import (
    BallInstance,
    distributed_weighted_project,
    project_l1_ball,
    project_parity_polytope,
)


class _RowwiseProjector(TransformerMixin, BaseEstimator):
    """Shared fit/validation plumbing for the stateless projectors."""

    def fit(self, X, y=None):
        X = as_matrix(X)
        self._check_params()
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        if not hasattr(self, "n_features_in_"):
            raise NotFittedError(
                f"This {type(self).__name__} instance is not fitted yet; call fit first."
            )
        X = as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} was fitted "
                f"with {self.n_features_in_}"
            )
        out = np.empty_like(X)
        for i in range(X.shape[0]):
            out[i] = self._project_row(X[i])
        return out

    def _check_params(self):
        pass


class SimplexProjection(_RowwiseProjector):
    """Project each row onto the scaled simplex {v >= 0 : sum v = scale}.

    Parameters
    ----------
    scale : positive simplex mass.
    algorithm : any registry id; with workers > 1 a serial id is promoted to
        its distributed counterpart.
    workers : logical worker count for the distributed stage.
    """

    def __init__(self, scale=1.0, algorithm="condat", workers=1):
        self.scale = scale
        self.algorithm = algorithm
        self.workers = workers

    def _check_params(self):
        _resolve(self.algorithm, self.workers)
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def _project_row(self, row):
        alg, k = _resolve(self.algorithm, self.workers)
        proj, _ = solve(ProjectionInstance(row, self.scale), alg, k=k)
        return proj.to_dense(row.size)


class L1BallProjection(_RowwiseProjector):
    """Project each row onto the l1 ball of the given radius; interior rows
    pass through unchanged."""

    def __init__(self, radius=1.0, algorithm="condat", workers=1):
        self.radius = radius
        self.algorithm = algorithm
        self.workers = workers

    def _check_params(self):
        _resolve(self.algorithm, self.workers)
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def _project_row(self, row):
        alg, k = _resolve(self.algorithm, self.workers)
        backend = lambda inst: solve(inst, alg, k=k)
        return project_l1_ball(BallInstance(row, self.radius), backend).to_dense()


class WeightedSimplexProjection(_RowwiseProjector):
    """Project each row onto {v >= 0 : sum w_i v_i = scale} for a fixed
    positive weight vector."""

    def __init__(self, weights=None, scale=1.0, variant="condat", workers=1):
        self.weights = weights
        self.scale = scale
        self.variant = variant
        self.workers = workers

    def _check_params(self):
        if self.weights is None:
            raise ValueError("weights must be provided")
        if self.variant not in ("pivot", "condat"):
            raise ValueError("variant must be 'pivot' or 'condat'")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def fit(self, X, y=None):
        super().fit(X)
        w = as_vector(self.weights, "weights")
        if w.size != self.n_features_in_:
            raise ValueError(
                f"weights length {w.size} does not match {self.n_features_in_} features"
            )
        self.weights_ = w
        return self

    def _project_row(self, row):
        inst = WeightedInstance(d=row, w=self.weights_, b=self.scale)
        _, proj = distributed_weighted_project(inst, self.workers, self.variant)
        return proj.to_dense(row.size)


class ParityPolytopeProjection(_RowwiseProjector):
    """Project each row onto the centered parity polytope."""

    def __init__(self, algorithm="condat", workers=1):
        self.algorithm = algorithm
        self.workers = workers

    def _check_params(self):
        _resolve(self.algorithm, self.workers)

    def _project_row(self, row):
        alg, k = _resolve(self.algorithm, self.workers)
        backend = lambda inst: solve(inst, alg, k=k)
        return project_parity_polytope(row, backend)
