"""Input validation helpers shared by the estimators and the functional API."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def check_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-D float64 array or raise ValidationError."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D array, got ndim={arr.ndim}")
    if arr.size and not np.isfinite(arr).all():
        raise ValidationError(f"{name} contains NaN or infinite values")
    return arr


def check_vector(v, name: str = "v") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be a 1-D vector, got ndim={arr.ndim}")
    if arr.size and not np.isfinite(arr).all():
        raise ValidationError(f"{name} contains NaN or infinite values")
    return arr


def check_balanced_counts(n: int, k: int, s: int) -> None:
    """Require n = k * s with positive k and s."""
    if k < 1 or s < 1:
        raise ValidationError(f"cluster count and size must be positive, got k={k}, s={s}")
    if n != k * s:
        raise ValidationError(f"{n} items cannot form {k} clusters of {s}: {k}*{s} = {k * s}")


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)
