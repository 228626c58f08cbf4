"""Scikit-learn estimator facade over the selection pipeline.

``SpectralRegression`` fits the linear model ``y = X @ coef + noise`` by
eigendecomposing the Gram matrix of ``X``, shrinking the spectral
coordinates with a data-driven smoothing level chosen by penalized
empirical risk, and rotating the result back.  It follows the estimator
contract (``get_params``/``set_params``, fitted attributes with trailing
underscores, ``fit``/``predict``), so it composes with pipelines, cloning,
and model selection utilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ._validation import as_float_matrix, as_float_vector
from .penalty import build_table
from .selection import SpectralObservation, select
from .smoothers import GridSpec, SmootherFamily, build_grid
from .spectra import decompose, project_observation

__all__ = ["SpectralRegression"]


class SpectralRegression(RegressorMixin, BaseEstimator):
    """Linear regression with data-driven spectral shrinkage.

    Parameters
    ----------
    family : str, default "cutoff"
        Smoother family: "cutoff", "tikhonov", "landweber", or "pinsker".
    order : int, default 1
        Tikhonov order.
    step_factor : float, default 1.1
        Landweber step bound relative to the largest eigenvalue.
    nu : float, default 1.0
        Pinsker profile exponent.
    grid : str, default "natural"
        Grid kind: "natural" or "geometric".
    n_grid : int, default 100
        Grid size for geometric grids (and landweber iteration counts).
    alpha_min, alpha_max : float, optional
        Geometric grid bounds; family-dependent defaults when omitted.
    gamma : float, default 0.5
        Penalty inflation parameter, > 0.
    sigma : float, default 1.0
        Known noise level of the observations.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
        Selected coefficient estimate in the original coordinates.
    alpha_ : float
        Selected smoothing level.
    g_ : int
        Selected grid row (0-based).
    spectrum_, basis_, grid_, table_, risk_curve_ :
        The fitted decomposition, smoother grid, penalty table, and the
        penalized empirical risk curve over the grid.
    """

    def __init__(
        self,
        family: str = "cutoff",
        order: int = 1,
        step_factor: float = 1.1,
        nu: float = 1.0,
        grid: str = "natural",
        n_grid: int = 100,
        alpha_min: float | None = None,
        alpha_max: float | None = None,
        gamma: float = 0.5,
        sigma: float = 1.0,
    ):
        self.family = family
        self.order = order
        self.step_factor = step_factor
        self.nu = nu
        self.grid = grid
        self.n_grid = n_grid
        self.alpha_min = alpha_min
        self.alpha_max = alpha_max
        self.gamma = gamma
        self.sigma = sigma

    def fit(self, X, y):
        """Decompose, project, select, and store the fitted estimate."""
        X = as_float_matrix(X, "X")
        y = as_float_vector(y, "y")
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"X has {X.shape[0]} rows but y has length {y.shape[0]}"
            )
        fam = SmootherFamily(
            kind=self.family,
            order=self.order,
            step_factor=self.step_factor,
            nu=self.nu,
        )
        spec = GridSpec(
            kind=self.grid,
            count=self.n_grid,
            alpha_min=self.alpha_min,
            alpha_max=self.alpha_max,
        )
        spectrum, basis = decompose(X)
        coords = project_observation(X, y, spectrum, basis)
        grid = build_grid(fam, spectrum, spec)
        table = build_table(grid, self.gamma)
        obs = SpectralObservation(y=coords, sigma=self.sigma, spectrum=spectrum)
        result = select(obs, grid, table)

        self.spectrum_ = spectrum
        self.basis_ = basis
        self.grid_ = grid
        self.table_ = table
        self.risk_curve_ = result.risk_values
        self.g_ = result.g_hat
        self.alpha_ = result.alpha_hat
        self.coef_ = basis @ result.estimate
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError(
                "this SpectralRegression instance is not fitted yet"
            )
        X = as_float_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features but the fit used "
                f"{self.n_features_in_}"
            )
        return X @ self.coef_
