"""Data-driven spectral regularization for ill-posed linear models.

The library estimates the coefficients of ``y = A @ theta + noise`` by
shrinking spectral coordinates with an ordered smoother family and choosing
the smoothing level through penalized empirical risk, where the penalty is
calibrated row by row so that the random underestimation of the true risk
is compensated uniformly across the whole family.
"""

from .config import ExperimentConfig, SpectrumConfig, builtin_configs, materialize
from .estimator import SpectralRegression
from .evaluation import (
    ExperimentReport,
    RiskCurve,
    SignalSpec,
    build_signal,
    excess_identity_check,
    excess_noise,
    oracle_risk,
    risk_curve,
    run_monte_carlo,
)
from .exceptions import (
    DynamicRangeError,
    FileFormatError,
    InvariantError,
    MonotonicityError,
    PositivityError,
)
from .penalty import (
    Diagnostic,
    PenaltyTable,
    balance_penalty,
    balance_term,
    build_table,
    noise_profile,
    penalty_value,
    solve_balance,
    table_diagnostics,
    variance_scale,
)
from .selection import (
    SelectionResult,
    SpectralObservation,
    empirical_risk,
    estimate_at,
    select,
)
from .smoothers import (
    GridSpec,
    OrderViolation,
    SmootherFamily,
    SmootherGrid,
    build_grid,
    cutoff_weights,
    ellipsoid_profile,
    explicit_grid,
    landweber_weights,
    pinsker_weights,
    tikhonov_weights,
    verify_ordered,
    weights_at,
)
from .spectra import (
    Spectrum,
    decompose,
    make_exponential_spectrum,
    make_polynomial_spectrum,
    project_observation,
    read_matrix_csv,
    read_spectrum_csv,
    validate,
    write_spectrum_csv,
)

__version__ = "0.1.0"

__all__ = [
    "DynamicRangeError",
    "Diagnostic",
    "ExperimentConfig",
    "ExperimentReport",
    "FileFormatError",
    "GridSpec",
    "InvariantError",
    "MonotonicityError",
    "OrderViolation",
    "PenaltyTable",
    "PositivityError",
    "RiskCurve",
    "SelectionResult",
    "SignalSpec",
    "SmootherFamily",
    "SmootherGrid",
    "SpectralObservation",
    "SpectralRegression",
    "Spectrum",
    "SpectrumConfig",
    "balance_penalty",
    "balance_term",
    "build_grid",
    "build_signal",
    "build_table",
    "builtin_configs",
    "cutoff_weights",
    "decompose",
    "ellipsoid_profile",
    "empirical_risk",
    "estimate_at",
    "excess_identity_check",
    "excess_noise",
    "explicit_grid",
    "landweber_weights",
    "make_exponential_spectrum",
    "make_polynomial_spectrum",
    "materialize",
    "noise_profile",
    "oracle_risk",
    "penalty_value",
    "pinsker_weights",
    "project_observation",
    "read_matrix_csv",
    "read_spectrum_csv",
    "risk_curve",
    "run_monte_carlo",
    "select",
    "solve_balance",
    "table_diagnostics",
    "tikhonov_weights",
    "validate",
    "variance_scale",
    "verify_ordered",
    "weights_at",
    "write_spectrum_csv",
]
