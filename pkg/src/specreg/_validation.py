"""Input validation helpers used by the library modules and the estimator."""

from __future__ import annotations

import numpy as np


def as_float_vector(x, name: str = "x") -> np.ndarray:
    """Coerce to a finite, non-empty 1-d float64 array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        first = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"{name} has a non-finite entry at index {first + 1}")
    return arr


def as_float_matrix(x, name: str = "x") -> np.ndarray:
    """Coerce to a finite, non-empty 2-d float64 array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_same_length(a: np.ndarray, b: np.ndarray, name_a: str, name_b: str) -> None:
    if a.shape[0] != b.shape[0]:
        raise ValueError(
            f"{name_a} has length {a.shape[0]} but {name_b} has length {b.shape[0]}"
        )


def check_weight_vector(h, n: int, name: str = "h") -> np.ndarray:
    """A smoother row: length-n floats inside [0, 1]."""
    arr = as_float_vector(h, name)
    if arr.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {arr.shape[0]}")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        first = int(np.flatnonzero((arr < 0.0) | (arr > 1.0))[0])
        raise ValueError(
            f"{name} has a weight outside [0, 1] at index {first + 1} "
            f"(value {arr[first]!r}); this indicates a parameter error"
        )
    return arr


def check_nonneg_scalar(x, name: str) -> float:
    val = float(x)
    if not np.isfinite(val) or val < 0.0:
        raise ValueError(f"{name} must be finite and >= 0, got {x!r}")
    return val


def check_positive_scalar(x, name: str) -> float:
    val = float(x)
    if not np.isfinite(val) or val <= 0.0:
        raise ValueError(f"{name} must be finite and > 0, got {x!r}")
    return val


def check_index(g: int, size: int, name: str = "g") -> int:
    idx = int(g)
    if idx < 0 or idx >= size:
        raise IndexError(f"{name}={g} out of range for size {size}")
    return idx
