"""Penalized empirical-risk selection of the smoothing level.

Observations enter in spectral coordinates only (matrix-domain data goes
through ``spectra.decompose`` / ``spectra.project_observation`` first),
which keeps this module free of linear-algebra concerns.  The selected row
is the grid argmin of

    R(g) = sum_k (1 - h_g(k))^2 y(k)^2 + sigma^2 * Pen(g),

ties broken toward the smaller index, i.e. toward more smoothing.  The grid
minimizer *is* the selected level; discretization is the caller's modelling
choice, and the full risk curve is returned so its effect stays visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_vector, check_nonneg_scalar, check_weight_vector
from .penalty import PenaltyTable
from .smoothers import SmootherGrid
from .spectra import Spectrum

__all__ = [
    "SpectralObservation",
    "SelectionResult",
    "empirical_risk",
    "select",
    "estimate_at",
]


@dataclass(frozen=True)
class SpectralObservation:
    """Observed coordinate sequence with its noise level and spectrum.

    sigma = 0 (noise-free data) is accepted; the risk formulas are
    continuous there and selection degenerates to residual minimization.
    """

    y: np.ndarray
    sigma: float
    spectrum: Spectrum

    def __post_init__(self):
        arr = as_float_vector(self.y, "y").copy()
        if arr.size != self.spectrum.n:
            raise ValueError(
                f"y has length {arr.size} but the spectrum has {self.spectrum.n}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "y", arr)
        object.__setattr__(self, "sigma", check_nonneg_scalar(self.sigma, "sigma"))


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a grid selection.

    ``g_hat`` is the 0-based selected row, ``alpha_hat`` its smoothing
    level, ``risk_values`` the full penalized empirical risk curve, and
    ``estimate`` the shrunken coordinate sequence of the selected row.
    """

    g_hat: int
    alpha_hat: float
    risk_values: np.ndarray = field(repr=False)
    estimate: np.ndarray = field(repr=False)


def empirical_risk(obs: SpectralObservation, h, pen: float) -> float:
    """Penalized empirical risk of one weight row at penalty value ``pen``."""
    hh = check_weight_vector(h, obs.spectrum.n, "h")
    resid = (1.0 - hh) * obs.y
    return math.fsum((resid * resid).tolist()) + obs.sigma**2 * float(pen)


def select(obs: SpectralObservation, grid: SmootherGrid, table: PenaltyTable) -> SelectionResult:
    """Minimize the penalized empirical risk over grid rows.

    The residual term is nonincreasing as weights grow pointwise, the
    penalty term nondecreasing; their sum is minimized over the grid with
    ties broken toward the smaller index (more smoothing).
    """
    if not np.array_equal(grid.spectrum.lam, obs.spectrum.lam):
        raise ValueError("grid and observation use different spectra")
    if table.size != grid.size:
        raise ValueError(
            f"table has {table.size} rows but the grid has {grid.size}"
        )
    risks = np.empty(grid.size)
    y = obs.y
    sig_sq = obs.sigma**2
    for g in range(grid.size):
        resid = (1.0 - grid.weights[g]) * y
        risks[g] = math.fsum((resid * resid).tolist()) + sig_sq * table.pen[g]
    g_hat = int(np.argmin(risks))
    return SelectionResult(
        g_hat=g_hat,
        alpha_hat=float(grid.alphas[g_hat]),
        risk_values=risks,
        estimate=grid.weights[g_hat] * y,
    )


def estimate_at(obs: SpectralObservation, h) -> np.ndarray:
    """The shrunken coordinate estimate h * y for one weight row."""
    hh = check_weight_vector(h, obs.spectrum.n, "h")
    return hh * obs.y
