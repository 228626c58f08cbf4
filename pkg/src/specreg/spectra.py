"""Eigenvalue spectra of the design operator.

Everything downstream works in the eigenbasis of the Gram matrix ``A.T @ A``:
a sorted sequence of positive eigenvalues ``lam(1) >= ... >= lam(n) > 0``
together with the orthonormal basis that diagonalizes the Gram matrix.  This
module owns that representation: construction from closed-form generator
families, ingestion of explicit matrices through a cyclic Jacobi
eigendecomposition, validation, and the CSV interchange format.

Indexing note: in-memory arrays are 0-based like everything else in Python;
error messages and the ``k`` column of the CSV format use the 1-based labels
of the mathematical notation.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_matrix, as_float_vector
from .exceptions import (
    DynamicRangeError,
    FileFormatError,
    InvariantError,
    MonotonicityError,
    PositivityError,
)

__all__ = [
    "DYNAMIC_RANGE_GUARD",
    "MAX_DECOMPOSE_DIM",
    "Spectrum",
    "validate",
    "make_polynomial_spectrum",
    "make_exponential_spectrum",
    "decompose",
    "project_observation",
    "read_spectrum_csv",
    "write_spectrum_csv",
    "read_matrix_csv",
]

# Smallest admissible ratio lam(n) / lam(1).  The penalty arithmetic squares
# reciprocal eigenvalues, so anything below this would silently leave double
# precision; such spectra are refused outright, never clamped.
DYNAMIC_RANGE_GUARD = 1e-150

# The matrix ingestion path is meant for desk-scale problems.
MAX_DECOMPOSE_DIM = 512

# Eigenvalues this far below lam(1) are kept as computed, but the caller is
# warned that the problem is close to numerically singular.
_CONDITIONING_WARN_RATIO = 1e-14

_RECONSTRUCTION_RTOL = 1e-10


def _check_values(lam: np.ndarray) -> None:
    nonpos = np.flatnonzero(lam <= 0.0)
    if nonpos.size:
        k = int(nonpos[0]) + 1
        raise PositivityError(
            f"eigenvalues must be positive; first violation at index {k} "
            f"(value {lam[k - 1]!r})"
        )
    rising = np.flatnonzero(np.diff(lam) > 0.0)
    if rising.size:
        k = int(rising[0]) + 2
        raise MonotonicityError(
            f"eigenvalues must be nonincreasing; first violation at index {k} "
            f"({lam[k - 2]!r} < {lam[k - 1]!r})"
        )
    if lam[-1] < DYNAMIC_RANGE_GUARD * lam[0]:
        raise DynamicRangeError(
            f"eigenvalue dynamic range too wide: lam({lam.size})/lam(1) = "
            f"{lam[-1] / lam[0]:.3e} is below the {DYNAMIC_RANGE_GUARD:g} guard"
        )


@dataclass(frozen=True)
class Spectrum:
    """A validated, nonincreasing sequence of positive eigenvalues.

    Attributes
    ----------
    lam : numpy.ndarray
        The eigenvalues, largest first.  Stored read-only.
    """

    lam: np.ndarray = field()

    def __post_init__(self):
        arr = as_float_vector(self.lam, "lam").copy()
        _check_values(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "lam", arr)

    @property
    def n(self) -> int:
        return int(self.lam.size)

    @property
    def cond(self) -> float:
        """Condition number lam(1) / lam(n)."""
        return float(self.lam[0] / self.lam[-1])

    def __eq__(self, other) -> bool:
        return isinstance(other, Spectrum) and np.array_equal(self.lam, other.lam)

    def __hash__(self):
        return hash((self.n, float(self.lam[0]), float(self.lam[-1])))


def validate(values) -> Spectrum:
    """Validate raw eigenvalues and wrap them in a :class:`Spectrum`.

    Raises one distinct error per violated invariant, naming the first
    offending 1-based index: :class:`PositivityError`,
    :class:`MonotonicityError`, or :class:`DynamicRangeError`.
    """
    return Spectrum(np.asarray(values, dtype=float))


def make_polynomial_spectrum(n: int, beta: float) -> Spectrum:
    """Polynomially decaying spectrum lam(k) = k**(-beta), k = 1..n.

    beta = 0 gives the identity spectrum.  Decay steep enough to violate the
    dynamic-range guard raises :class:`DynamicRangeError`.
    """
    if int(n) < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    b = float(beta)
    if b < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    k = np.arange(1, int(n) + 1, dtype=float)
    return Spectrum(k ** -b)


def make_exponential_spectrum(n: int, beta: float) -> Spectrum:
    """Exponentially decaying spectrum lam(k) = exp(-beta * k), k = 1..n."""
    if int(n) < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    b = float(beta)
    if b < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    k = np.arange(1, int(n) + 1, dtype=float)
    return Spectrum(np.exp(-b * k))


def _jacobi_eigh(sym: np.ndarray, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) unordered; ``sym`` is not modified.
    Sweeps stop once the off-diagonal Frobenius mass drops below 1e-14 of the
    matrix norm, which leaves reconstruction error far inside the 1e-10
    contract checked by :func:`decompose`.
    """
    b = np.array(sym, dtype=float, copy=True)
    n = b.shape[0]
    v = np.eye(n)
    if n == 1:
        return np.diag(b).copy(), v
    fro = float(np.linalg.norm(b))
    if fro == 0.0:
        return np.zeros(n), v
    stop = 1e-14 * fro
    for _ in range(max_sweeps):
        # Summing the off-diagonal squares directly avoids the catastrophic
        # cancellation of fro^2 - diag^2 near convergence.
        off_sq = b * b
        np.fill_diagonal(off_sq, 0.0)
        off = math.sqrt(float(np.sum(off_sq)))
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = b[p, q]
                if apq == 0.0:
                    continue
                theta = (b[q, q] - b[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                bp = b[:, p].copy()
                bq = b[:, q].copy()
                b[:, p] = c * bp - s * bq
                b[:, q] = s * bp + c * bq
                bp = b[p, :].copy()
                bq = b[q, :].copy()
                b[p, :] = c * bp - s * bq
                b[q, :] = s * bp + c * bq
                b[p, q] = 0.0
                b[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(b).copy(), v


def decompose(a) -> tuple[Spectrum, np.ndarray]:
    """Eigendecompose the Gram matrix of a design matrix.

    Parameters
    ----------
    a : array-like, shape (m, n)
        Design matrix with full column rank, n <= 512.

    Returns
    -------
    spectrum : Spectrum
        Eigenvalues of ``a.T @ a`` sorted nonincreasing; ties keep their
        original order.
    basis : numpy.ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, aligned with the spectrum.

    Raises
    ------
    ValueError
        Dimension over the limit or non-finite input.
    DynamicRangeError
        Gram matrix numerically singular beyond the guard (reported, never
        clipped).
    InvariantError
        The rotated factors fail the reconstruction self-check.
    """
    mat = as_float_matrix(a, "a")
    n = mat.shape[1]
    if n > MAX_DECOMPOSE_DIM:
        raise ValueError(
            f"matrix has {n} columns; the ingestion path is capped at "
            f"{MAX_DECOMPOSE_DIM}"
        )
    gram = mat.T @ mat
    lam, vec = _jacobi_eigh(gram)
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    vec = vec[:, order]
    if lam[-1] <= 0.0 or lam[-1] < DYNAMIC_RANGE_GUARD * lam[0]:
        raise DynamicRangeError(
            "gram matrix is numerically singular beyond the dynamic-range "
            f"guard (smallest eigenvalue {lam[-1]!r}, largest {lam[0]!r}); "
            "the design must have full column rank"
        )
    if lam[-1] < _CONDITIONING_WARN_RATIO * lam[0]:
        warnings.warn(
            f"gram matrix is badly conditioned: lam({n})/lam(1) = "
            f"{lam[-1] / lam[0]:.3e}; eigenvalues kept as computed",
            RuntimeWarning,
            stacklevel=2,
        )
    gram_norm = float(np.linalg.norm(gram))
    resid = float(np.linalg.norm(gram - (vec * lam) @ vec.T))
    if gram_norm > 0.0 and resid > _RECONSTRUCTION_RTOL * gram_norm:
        raise InvariantError(
            f"eigendecomposition reconstruction error {resid / gram_norm:.3e} "
            f"exceeds {_RECONSTRUCTION_RTOL:g}"
        )
    return Spectrum(lam), vec


def project_observation(a, y, spectrum: Spectrum, basis: np.ndarray) -> np.ndarray:
    """Carry matrix-domain observations into spectral coordinates.

    Given observations ``y = a @ theta + noise`` and the decomposition of
    ``a.T @ a``, returns the coordinate sequence whose k-th entry estimates
    the k-th basis coefficient of theta with noise scaled by
    ``lam(k) ** -0.5``.
    """
    mat = as_float_matrix(a, "a")
    obs = as_float_vector(y, "y")
    if mat.shape[0] != obs.shape[0]:
        raise ValueError(
            f"a has {mat.shape[0]} rows but y has length {obs.shape[0]}"
        )
    if mat.shape[1] != spectrum.n:
        raise ValueError(
            f"a has {mat.shape[1]} columns but the spectrum has {spectrum.n}"
        )
    return (basis.T @ (mat.T @ obs)) / spectrum.lam


def write_spectrum_csv(spectrum: Spectrum, path) -> None:
    """Write a spectrum as CSV with header ``k,lambda`` and 1-based k."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "lambda"])
        for i, val in enumerate(spectrum.lam):
            writer.writerow([i + 1, f"{val:.17g}"])


def read_spectrum_csv(path) -> Spectrum:
    """Read a ``k,lambda`` CSV back into a validated spectrum."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["k", "lambda"]:
        raise FileFormatError(f"{path}: expected header 'k,lambda'")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise FileFormatError(f"{path}:{lineno}: expected two columns")
        try:
            k = int(row[0])
            val = float(row[1])
        except ValueError as exc:
            raise FileFormatError(f"{path}:{lineno}: {exc}") from None
        if k != len(values) + 1:
            raise FileFormatError(
                f"{path}:{lineno}: k column must run 1..n consecutively, got {k}"
            )
        values.append(val)
    if not values:
        raise FileFormatError(f"{path}: no data rows")
    return validate(values)


def read_matrix_csv(path) -> np.ndarray:
    """Read a headerless CSV of comma-separated rows as a float matrix."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise FileFormatError(
                f"{path}: ragged rows (row {lineno} has {len(row)} columns, "
                f"expected {width})"
            )
    return np.asarray(rows, dtype=float)
