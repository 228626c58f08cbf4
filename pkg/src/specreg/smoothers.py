"""Ordered smoother families and their discretized grids.

A smoother assigns each spectral coordinate a shrinkage weight in [0, 1].  A
family of smoothers indexed by one smoothing parameter is *ordered* when
every member is monotone across coordinates and no two members cross: if one
member is strictly below another anywhere, it stays (weakly) below
everywhere.  Four classical families are provided, plus explicit grids for
hand-built weight tables.

A grid materializes a family on a finite set of smoothing levels, row 0
being the maximal-smoothing member.  The grid *is* the family as far as the
rest of the library is concerned: penalties, selection, and invariant checks
all quantify over grid rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import as_float_vector, check_index
from .spectra import Spectrum

__all__ = [
    "FAMILY_KINDS",
    "SmootherFamily",
    "GridSpec",
    "SmootherGrid",
    "OrderViolation",
    "cutoff_weights",
    "tikhonov_weights",
    "landweber_weights",
    "pinsker_weights",
    "ellipsoid_profile",
    "build_grid",
    "explicit_grid",
    "verify_ordered",
    "weights_at",
]

FAMILY_KINDS = ("cutoff", "tikhonov", "landweber", "pinsker", "explicit")

ORDER_TOL = 1e-12

# Largest G * n a dense grid may occupy; the natural cutoff grid on a big
# spectrum would otherwise allocate silently into the gigabytes.
_MAX_GRID_ELEMENTS = 20_000_000


@dataclass(frozen=True)
class SmootherFamily:
    """One of the built-in smoother families with its shape parameters.

    Parameters
    ----------
    kind : str
        "cutoff", "tikhonov", "landweber", "pinsker", or "explicit".
    order : int
        Tikhonov order q >= 1 (q = 1 is classical regularization).
    step : float, optional
        Landweber absolute step bound; must exceed the largest eigenvalue.
        When omitted, ``step_factor`` times the largest eigenvalue is used.
    step_factor : float
        Relative landweber step bound, > 1.
    nu : float
        Exponent of the coordinate profile ``x ** nu`` used both by the
        pinsker weights and the ellipsoid signal class.
    """

    kind: str
    order: int = 1
    step: Optional[float] = None
    step_factor: float = 1.1
    nu: float = 1.0

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(
                f"unknown family kind {self.kind!r}; expected one of {FAMILY_KINDS}"
            )
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"order must be an integer >= 1, got {self.order!r}")
        object.__setattr__(self, "order", int(self.order))
        if self.step is not None and not (float(self.step) > 0.0):
            raise ValueError(f"step must be > 0, got {self.step!r}")
        if not (self.step_factor > 1.0):
            raise ValueError(f"step_factor must be > 1, got {self.step_factor!r}")
        if not (self.nu > 0.0):
            raise ValueError(f"nu must be > 0, got {self.nu!r}")

    def resolve_step(self, spectrum: Spectrum) -> float:
        """Landweber step bound for a concrete spectrum, validated > lam(1)."""
        a = float(self.step) if self.step is not None else self.step_factor * float(
            spectrum.lam[0]
        )
        if not a > float(spectrum.lam[0]):
            raise ValueError(
                f"landweber step {a!r} must exceed the largest eigenvalue "
                f"{spectrum.lam[0]!r}"
            )
        return a


def cutoff_weights(lam, alpha: float) -> np.ndarray:
    """Projection weights 1 where lam >= alpha, else 0."""
    return (np.asarray(lam, dtype=float) >= float(alpha)).astype(float)


def tikhonov_weights(lam, alpha: float, order: int = 1) -> np.ndarray:
    """Weights (lam / (lam + alpha)) ** order for alpha > 0."""
    if not float(alpha) > 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha!r}")
    lam = np.asarray(lam, dtype=float)
    return (lam / (lam + float(alpha))) ** int(order)


def landweber_weights(lam, step: float, iterations: int) -> np.ndarray:
    """Weights 1 - (1 - lam/step) ** (iterations + 1) after a fixed
    iteration count of gradient-descent smoothing.

    The raw formula tolerates step == max(lam) (the boundary weight is
    exactly 1); family grids require strict inequality so the iteration
    contracts, via :meth:`SmootherFamily.resolve_step`.
    """
    lam = np.asarray(lam, dtype=float)
    if not float(step) >= float(np.max(lam)):
        raise ValueError(
            f"step {step!r} must be at least the largest eigenvalue {np.max(lam)!r}"
        )
    if int(iterations) != iterations or iterations < 0:
        raise ValueError(f"iterations must be an integer >= 0, got {iterations!r}")
    return 1.0 - (1.0 - lam / float(step)) ** (int(iterations) + 1)


def pinsker_weights(lam, alpha: float, nu: float = 1.0) -> np.ndarray:
    """Weights [1 - alpha * (1/lam) ** nu]_+, hitting exactly 0 once
    alpha * (1/lam) ** nu >= 1."""
    if not float(alpha) > 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha!r}")
    lam = np.asarray(lam, dtype=float)
    return np.clip(1.0 - float(alpha) * lam ** -float(nu), 0.0, None)


def ellipsoid_profile(x, nu: float):
    """The coordinate profile b(x) = x ** nu shared by the pinsker family
    and the ellipsoid signal class."""
    return np.asarray(x, dtype=float) ** float(nu)


@dataclass(frozen=True)
class GridSpec:
    """How to discretize a family into a grid.

    kind "natural" uses the family's own discrete structure (eigenvalue
    count for cutoff, iteration counts 1..count for landweber) and falls
    back to a geometric grid for the continuously parametrized families.
    kind "geometric" lays ``count`` smoothing levels geometrically between
    ``alpha_max`` (maximal smoothing, row 0) and ``alpha_min``.  kind
    "explicit" takes ``values`` as smoothing levels directly (iteration
    counts for landweber), or, together with ``weights``, a hand-built
    weight table.
    """

    kind: str = "natural"
    count: int = 100
    alpha_min: Optional[float] = None
    alpha_max: Optional[float] = None
    values: Optional[tuple] = None
    weights: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("natural", "geometric", "explicit"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if int(self.count) < 1:
            raise ValueError(f"count must be >= 1, got {self.count!r}")
        object.__setattr__(self, "count", int(self.count))
        if self.values is not None:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.weights is not None:
            object.__setattr__(
                self, "weights", tuple(tuple(float(w) for w in row) for row in self.weights)
            )


@dataclass(frozen=True)
class SmootherGrid:
    """A family evaluated on a finite set of smoothing levels.

    ``weights[g]`` is the weight row at smoothing level ``alphas[g]``; row 0
    is the maximal-smoothing member.  Arrays are stored read-only.
    """

    family: SmootherFamily
    spectrum: Spectrum
    alphas: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float).copy()
        weights = np.asarray(self.weights, dtype=float).copy()
        if weights.ndim != 2 or alphas.ndim != 1:
            raise ValueError("grid needs 1-d alphas and 2-d weights")
        if weights.shape[0] != alphas.size:
            raise ValueError(
                f"{alphas.size} smoothing levels but {weights.shape[0]} weight rows"
            )
        if weights.shape[1] != self.spectrum.n:
            raise ValueError(
                f"weight rows have length {weights.shape[1]} but the spectrum "
                f"has {self.spectrum.n} eigenvalues"
            )
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights contain non-finite entries")
        if np.any(weights < 0.0) or np.any(weights > 1.0):
            g, k = np.argwhere((weights < 0.0) | (weights > 1.0))[0]
            raise ValueError(
                f"weight outside [0, 1] at row {g + 1}, index {k + 1} "
                f"(value {weights[g, k]!r}); this indicates a parameter error"
            )
        alphas.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return int(self.alphas.size)


def _geometric_levels(alpha_max: float, alpha_min: float, count: int) -> np.ndarray:
    if not (0.0 < alpha_min <= alpha_max):
        raise ValueError(
            f"need 0 < alpha_min <= alpha_max, got [{alpha_min!r}, {alpha_max!r}]"
        )
    if count == 1 or alpha_min == alpha_max:
        return np.full(count, alpha_max)
    return np.geomspace(alpha_max, alpha_min, count)


def _check_size(rows: int, n: int) -> None:
    if rows * n > _MAX_GRID_ELEMENTS:
        raise ValueError(
            f"grid of {rows} x {n} weights exceeds the dense-storage cap; "
            "use a coarser (geometric or explicit) grid"
        )


def build_grid(
    family: SmootherFamily, spectrum: Spectrum, grid_spec: GridSpec | None = None
) -> SmootherGrid:
    """Materialize a family on a spectrum.

    Rows are sorted from maximal smoothing (row 0) to minimal, so the
    variance scale of the excess-risk noise is nondecreasing along rows.
    The natural cutoff grid is the ``n`` nested leading-coordinate
    projections (row g keeps coordinates 1..g+1, nominal level lam(g+1)),
    which coincides with eigenvalue thresholding whenever the spectrum is
    strictly decreasing and stays well-defined under ties.  The natural
    landweber grid is iteration counts 1..count with level 1/count.
    """
    spec = grid_spec if grid_spec is not None else GridSpec()
    lam = spectrum.lam
    n = spectrum.n
    kind = family.kind

    if kind == "explicit":
        raise ValueError("explicit weight tables are built with explicit_grid()")

    if kind == "cutoff":
        if spec.kind == "natural":
            _check_size(n, n)
            weights = np.tril(np.ones((n, n)))
            alphas = lam.copy()
        else:
            alphas = _levels_from_spec(spec, lam)
            _check_size(alphas.size, n)
            weights = np.stack([cutoff_weights(lam, a) for a in alphas])
    elif kind == "tikhonov":
        alphas = _levels_from_spec(spec, lam)
        _check_size(alphas.size, n)
        weights = np.stack(
            [tikhonov_weights(lam, a, family.order) for a in alphas]
        )
    elif kind == "landweber":
        step = family.resolve_step(spectrum)
        if spec.kind == "geometric":
            raise ValueError(
                "landweber grids are iteration counts; use kind 'natural' "
                "or 'explicit'"
            )
        if spec.kind == "explicit":
            if spec.values is None:
                raise ValueError("explicit landweber grid needs iteration counts")
            iters = [int(v) for v in spec.values]
            if any(float(i) != v for i, v in zip(iters, spec.values)) or any(
                i < 1 for i in iters
            ):
                raise ValueError(
                    f"iteration counts must be integers >= 1, got {spec.values!r}"
                )
            if sorted(iters) != iters or len(set(iters)) != len(iters):
                raise ValueError("iteration counts must be strictly increasing")
        else:
            iters = list(range(1, spec.count + 1))
        _check_size(len(iters), n)
        weights = np.stack([landweber_weights(lam, step, it) for it in iters])
        alphas = np.array([1.0 / it for it in iters])
    elif kind == "pinsker":
        alphas = _levels_from_spec(spec, lam, nu=family.nu)
        _check_size(alphas.size, n)
        weights = np.stack([pinsker_weights(lam, a, family.nu) for a in alphas])
    else:  # pragma: no cover - guarded by SmootherFamily
        raise ValueError(f"unknown family kind {kind!r}")

    return SmootherGrid(family, spectrum, alphas, weights)


def _levels_from_spec(spec: GridSpec, lam: np.ndarray, nu: float | None = None) -> np.ndarray:
    """Smoothing levels for the continuously parametrized families."""
    if spec.kind == "explicit":
        if spec.values is None:
            raise ValueError("explicit grid needs values")
        alphas = as_float_vector(spec.values, "grid values")
        if np.any(alphas <= 0.0):
            raise ValueError("smoothing levels must be positive")
        return np.sort(alphas)[::-1].copy()
    if nu is None:
        # tikhonov scale (also used for explicit-level cutoff fallbacks):
        # maximal smoothing at the top eigenvalue, minimal well below the
        # smallest one so the low-smoothing end approaches the raw estimate.
        alpha_max = spec.alpha_max if spec.alpha_max is not None else float(lam[0])
        alpha_min = (
            spec.alpha_min if spec.alpha_min is not None else 1e-3 * float(lam[-1])
        )
    else:
        # pinsker levels live on the scale of lam ** nu; the default top
        # level keeps the leading weight at 0.5 so the maximal-smoothing row
        # is never all-zero (an all-zero row has no variance scale).
        alpha_max = (
            spec.alpha_max if spec.alpha_max is not None else 0.5 * float(lam[0]) ** nu
        )
        alpha_min = (
            spec.alpha_min
            if spec.alpha_min is not None
            else 1e-3 * float(lam[-1]) ** nu
        )
    return _geometric_levels(float(alpha_max), float(alpha_min), spec.count)


def explicit_grid(spectrum: Spectrum, alphas, weights) -> SmootherGrid:
    """Wrap a hand-built weight table as a grid (family kind "explicit").

    No ordering is assumed or enforced here; run :func:`verify_ordered` to
    check Definition-style orderedness of arbitrary tables.
    """
    fam = SmootherFamily(kind="explicit")
    return SmootherGrid(fam, spectrum, np.asarray(alphas, float), np.asarray(weights, float))


@dataclass(frozen=True)
class OrderViolation:
    """Witness for a failed orderedness check.

    For ``kind == "crossing"``: rows g1 and g2 satisfy
    ``weights[g1][k_prime] < weights[g2][k_prime]`` yet
    ``weights[g1][k] > weights[g2][k] + tol``.  For
    ``kind == "row-monotonicity"`` the row g1 both rises and falls beyond
    tolerance (k_prime marks the first rise, k the first fall).  Indices are
    0-based; serialized payloads add 1.
    """

    kind: str
    g1: int
    g2: int
    k_prime: int
    k: int


def verify_ordered(
    grid: SmootherGrid, tol: float = ORDER_TOL
) -> tuple[bool, Optional[OrderViolation]]:
    """Check the ordered-family property of a grid's weight table.

    Every row must be monotone across coordinates (either direction), and no
    two rows may cross: whenever one row is strictly below another at some
    coordinate, it must stay below everywhere, up to ``tol``.  Returns
    ``(True, None)`` or ``(False, witness)`` with the first witness in row
    order.
    """
    w = grid.weights
    g_count = w.shape[0]
    diffs = np.diff(w, axis=1)
    for g in range(g_count):
        rises = diffs[g] > tol
        falls = diffs[g] < -tol
        if rises.any() and falls.any():
            return False, OrderViolation(
                kind="row-monotonicity",
                g1=g,
                g2=g,
                k_prime=int(np.flatnonzero(rises)[0]) + 1,
                k=int(np.flatnonzero(falls)[0]) + 1,
            )
    for g1 in range(g_count):
        below = w[g1] < w  # (G, n): strictly below row g1? no -- g2 rows
        above = w[g1] > w + tol
        # row g1 crosses row g2 when it is strictly below somewhere and
        # above tolerance somewhere else
        for g2 in range(g_count):
            if g1 == g2:
                continue
            if below[g2].any() and above[g2].any():
                return False, OrderViolation(
                    kind="crossing",
                    g1=g1,
                    g2=g2,
                    k_prime=int(np.flatnonzero(below[g2])[0]),
                    k=int(np.flatnonzero(above[g2])[0]),
                )
    return True, None


def weights_at(grid: SmootherGrid, g: int) -> np.ndarray:
    """The weight row at grid index ``g`` (0-based, read-only view)."""
    idx = check_index(g, grid.size, "g")
    return grid.weights[idx]
