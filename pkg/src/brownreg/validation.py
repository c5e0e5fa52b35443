"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numpy as np

from .exceptions import DomainError, UsageError


def check_matrix(a, *, name="a", copy=False) -> np.ndarray:
    """Return ``a`` as a finite square complex128 array.

    Raises :class:`UsageError` for non-square, empty or non-finite input.
    """
    arr = np.array(a, dtype=np.complex128, copy=copy) if copy else np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise UsageError(f"{name} must be a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise UsageError(f"{name} must have dimension n >= 1")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} contains NaN or Inf entries")
    return arr


def check_dimension(n, *, name="n") -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise UsageError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def check_flow_values(values, *, strict=True) -> np.ndarray:
    """Singular values sorted descending, finite, positive and (if ``strict``) distinct."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise DomainError("singular values must be a nonempty finite list")
    if np.any(v <= 0):
        raise DomainError("singular values must be strictly positive")
    if strict and np.any(np.diff(-np.sort(-v)) == 0):
        raise DomainError("singular values must be pairwise distinct")
    return v


def is_strictly_decreasing(v) -> bool:
    v = np.asarray(v)
    return bool(np.all(v[:-1] > v[1:]))
