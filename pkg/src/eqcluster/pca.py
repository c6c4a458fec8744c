"""Dimensionality reduction with a deterministic sign convention.

Principal directions come from the SVD of the centered matrix. SVD signs
are arbitrary, so each component is flipped to make its largest-magnitude
entry non-negative; two runs on the same input then agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .embeddings import EmbeddingSet
from .errors import ValidationError
from .validation import check_matrix

_ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class PcaModel:
    """Fitted projection: row space of `components` over the centered data."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def __post_init__(self):
        k, d = self.components.shape
        if self.mean.shape != (d,):
            raise ValidationError(
                f"mean has shape {self.mean.shape}, components expect ({d},)"
            )
        gram = self.components @ self.components.T
        if not np.allclose(gram, np.eye(k), atol=_ORTHO_TOL):
            raise ValidationError("component rows are not orthonormal")
        ev = self.explained_variance
        if ev.shape != (k,) or (ev < 0).any() or (np.diff(ev) > 0).any():
            raise ValidationError("explained variance must be non-negative, non-increasing")

    @property
    def dim_in(self) -> int:
        return self.components.shape[1]

    @property
    def dim_out(self) -> int:
        return self.components.shape[0]


def _fit_arrays(matrix: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, d = matrix.shape
    if n < 2:
        raise ValidationError(f"need at least 2 rows to fit, got {n}")
    if k < 1:
        raise ValidationError(f"component count must be positive, got {k}")
    k_eff = min(k, n - 1, d)
    mean = matrix.mean(axis=0)
    centered = matrix - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:k_eff].copy()
    for row in components:
        # Largest-magnitude entry non-negative; argmax takes the first on ties.
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    explained = (s[:k_eff] ** 2) / (n - 1)
    return mean, components, explained


def fit_pca(es: EmbeddingSet, k: int) -> PcaModel:
    """Fit the top min(k, N-1, D) principal directions of the embedding set."""
    matrix = check_matrix(es.matrix, "embedding matrix")
    mean, components, explained = _fit_arrays(matrix, k)
    return PcaModel(mean=mean, components=components, explained_variance=explained)


def transform_pca(model: PcaModel, es: EmbeddingSet) -> EmbeddingSet:
    """Project every row onto the fitted components."""
    if es.dim != model.dim_in:
        raise ValidationError(
            f"embedding dim {es.dim} does not match fitted dim {model.dim_in}"
        )
    projected = (es.matrix - model.mean) @ model.components.T
    return EmbeddingSet(ids=es.ids, matrix=projected)


class DeterministicPCA(BaseEstimator, TransformerMixin):
    """PCA transformer with reproducible component signs.

    Unlike the stock decomposition, component signs follow a fixed rule
    (largest-magnitude entry non-negative), so fitted models are stable
    across runs and platforms. The effective component count is clamped
    to min(n_components, N-1, D).

    Attributes after fit: mean_, components_, explained_variance_.
    """

    def __init__(self, n_components: int = 40):
        self.n_components = n_components

    def fit(self, X, y=None):
        matrix = check_matrix(X, "X")
        mean, components, explained = _fit_arrays(matrix, self.n_components)
        self.mean_ = mean
        self.components_ = components
        self.explained_variance_ = explained
        self.n_features_in_ = matrix.shape[1]
        return self

    def transform(self, X):
        self._check_fitted()
        matrix = check_matrix(X, "X")
        if matrix.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"X has {matrix.shape[1]} features, fitted on {self.n_features_in_}"
            )
        return (matrix - self.mean_) @ self.components_.T

    def inverse_transform(self, Y):
        self._check_fitted()
        projected = check_matrix(Y, "Y")
        if projected.shape[1] != self.components_.shape[0]:
            raise ValidationError(
                f"Y has {projected.shape[1]} columns, model produces "
                f"{self.components_.shape[0]}"
            )
        return projected @ self.components_ + self.mean_

    def model(self) -> PcaModel:
        self._check_fitted()
        return PcaModel(
            mean=self.mean_,
            components=self.components_,
            explained_variance=self.explained_variance_,
        )

    def _check_fitted(self):
        if not hasattr(self, "components_"):
            raise ValidationError("transformer is not fitted; call fit first")
