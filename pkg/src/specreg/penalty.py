"""The risk-balancing penalty.

The empirical risk of a smoother row underestimates its true risk by a
random amount whose fluctuations grow with the amount of smoothing *not*
applied.  This module computes, for every grid row, a penalty calibrated so
that those fluctuations are uniformly compensated across the whole grid:

* ``variance_scale`` -- the standard deviation D of the centered quadratic
  noise functional of a row (the excess-risk noise scale),
* ``noise_profile`` -- the unit-norm direction rho of that noise across
  coordinates,
* ``solve_balance``  -- the root mu of ``sum_k T(mu * rho(k)) = log(D / Dbar)``
  where ``T`` is the per-coordinate balance term and ``Dbar`` is the scale of
  the maximal-smoothing row,
* ``balance_penalty`` -- the additive penalty component
  ``Qcirc = 2 D mu sum_k rho(k)^2 / (1 - 2 mu rho(k))``,
* ``penalty_value``  -- the full penalty ``2 sum_k h(k)/lam(k) + (1+gamma) Qcirc``.

Scalar reductions here follow the compensated-summation policy: every sum
that lands in a stored quantity goes through ``math.fsum`` because the
summands (squared reciprocal eigenvalues) can span hundreds of orders of
magnitude.  The bisection's inner iterations use numpy's pairwise reduction
for speed; the accepted root is then re-verified against the residual
tolerance with an fsum evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_scalar, check_weight_vector
from .exceptions import InvariantError
from .smoothers import SmootherGrid
from .spectra import Spectrum

__all__ = [
    "NORMALIZATION_TOL",
    "RESIDUAL_TOL",
    "variance_scale",
    "balance_term",
    "noise_profile",
    "solve_balance",
    "balance_penalty",
    "penalty_value",
    "PenaltyTable",
    "build_table",
    "Diagnostic",
    "table_diagnostics",
]

NORMALIZATION_TOL = 1e-12
RESIDUAL_TOL = 1e-12
_MAX_BISECT = 200
_BRACKET_MARGIN = 1e-9

# Slack for the inequality diagnostics: purely floating-point headroom, far
# below every meaningful scale in the inequalities themselves.
_DIAG_RTOL = 1e-9


def _fsum(arr: np.ndarray) -> float:
    return math.fsum(arr.tolist())


def variance_scale(h, spectrum: Spectrum) -> float:
    """Noise scale D = sqrt(2 * sum_k (h(2-h)/lam)^2) of a weight row.

    Zero exactly when the row is identically zero.
    """
    hh = check_weight_vector(h, spectrum.n, "h")
    u = hh * (2.0 - hh) / spectrum.lam
    return math.sqrt(2.0 * _fsum(u * u))


def balance_term(x: float) -> float:
    """Per-coordinate term T(x) = log(1-2x)/2 + x + 2x^2/(1-2x) on [0, 1/2).

    Nonnegative, increasing, T(x) ~ x^2 near zero and divergent at 1/2.
    """
    x = float(x)
    if x < 0.0 or x >= 0.5:
        raise ValueError(f"balance term needs 0 <= x < 1/2, got {x!r}")
    one_minus = 1.0 - 2.0 * x
    return 0.5 * math.log1p(-2.0 * x) + x + 2.0 * x * x / one_minus


def _balance_sum_fast(x: np.ndarray) -> float:
    """Vector balance-term sum via numpy's pairwise reduction (inner loop)."""
    one_minus = 1.0 - 2.0 * x
    return float(np.sum(0.5 * np.log1p(-2.0 * x) + x + 2.0 * x * x / one_minus))


def _balance_sum_exact(x: np.ndarray) -> float:
    """Vector balance-term sum with compensated accumulation."""
    one_minus = 1.0 - 2.0 * x
    return _fsum(0.5 * np.log1p(-2.0 * x) + x + 2.0 * x * x / one_minus)


def noise_profile(h, spectrum: Spectrum, scale: float) -> np.ndarray:
    """Unit-norm noise direction rho(k) = sqrt(2) * h(2-h) / (lam * D).

    ``scale`` must be the row's variance scale; the unit norm is verified to
    :data:`NORMALIZATION_TOL` with compensated summation.  A zero scale
    (all-zero row) is a domain error.
    """
    hh = check_weight_vector(h, spectrum.n, "h")
    d = check_positive_scalar(scale, "scale")
    rho = math.sqrt(2.0) * hh * (2.0 - hh) / (spectrum.lam * d)
    norm = _fsum(rho * rho)
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise InvariantError(
            f"noise profile does not normalize: sum rho^2 = {norm!r} "
            "(is `scale` the row's variance scale?)"
        )
    return rho


def solve_balance(rho: np.ndarray, target: float, max_iter: int = _MAX_BISECT) -> float:
    """Root mu >= 0 of ``sum_k T(mu * rho(k)) = target`` by bracketed bisection.

    The bracket is [0, (1/2 - 1e-9) / max(rho)]; the balance sum diverges at
    the upper end, so a root exists for every representable target >= 0.
    Iterates until the residual is within ``RESIDUAL_TOL * max(1, target)``
    (verified with compensated summation) or the iteration cap is reached,
    whichever comes first; a cap hit without meeting the tolerance raises
    :class:`InvariantError`.
    """
    rho = np.asarray(rho, dtype=float)
    target = float(target)
    if target < 0.0:
        raise ValueError(f"target must be >= 0, got {target!r}")
    if target == 0.0:
        return 0.0
    rmax = float(np.max(rho))
    if rmax <= 0.0:
        raise ValueError("profile has no positive entries but target > 0")
    tol = RESIDUAL_TOL * max(1.0, target)
    lo = 0.0
    hi = (0.5 - _BRACKET_MARGIN) / rmax
    mid = hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f = _balance_sum_fast(mid * rho)
        if abs(f - target) <= 0.5 * tol:
            break
        if f < target:
            lo = mid
        else:
            hi = mid
    resid = abs(_balance_sum_exact(mid * rho) - target)
    if resid > tol:
        raise InvariantError(
            f"balance root residual {resid:.3e} exceeds tolerance {tol:.3e} "
            f"after {max_iter} bisection steps"
        )
    return mid


def balance_penalty(scale: float, mu: float, rho: np.ndarray) -> float:
    """Penalty component Qcirc = 2 D mu sum_k rho^2 / (1 - 2 mu rho)."""
    d = check_positive_scalar(scale, "scale")
    mu = float(mu)
    if mu < 0.0:
        raise ValueError(f"mu must be >= 0, got {mu!r}")
    if mu == 0.0:
        return 0.0
    rho = np.asarray(rho, dtype=float)
    denom = 1.0 - 2.0 * mu * rho
    if np.any(denom <= 0.0):
        raise ValueError("mu * max(rho) must stay below 1/2")
    return 2.0 * d * mu * _fsum(rho * rho / denom)


def penalty_value(h, spectrum: Spectrum, qcirc: float, gamma: float) -> float:
    """Full penalty 2 * sum_k h(k)/lam(k) + (1 + gamma) * qcirc."""
    hh = check_weight_vector(h, spectrum.n, "h")
    if not (float(gamma) > 0.0):
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    q = float(qcirc)
    if q < 0.0:
        raise ValueError(f"qcirc must be >= 0, got {qcirc!r}")
    return 2.0 * _fsum(hh / spectrum.lam) + (1.0 + float(gamma)) * q


@dataclass(frozen=True)
class PenaltyTable:
    """Per-row penalty quantities for a grid.

    Fields are aligned with the grid rows: ``d`` the variance scales, ``mu``
    the balance roots, ``qcirc`` the balance penalties, ``pen`` the full
    penalties; ``gamma`` the inflation parameter; ``dbar`` the scale of the
    maximal-smoothing row (row 0).
    """

    alphas: np.ndarray
    d: np.ndarray
    mu: np.ndarray
    qcirc: np.ndarray
    pen: np.ndarray
    gamma: float

    def __post_init__(self):
        for name in ("alphas", "d", "mu", "qcirc", "pen"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dbar(self) -> float:
        return float(self.d[0])

    @property
    def size(self) -> int:
        return int(self.d.size)


def build_table(grid: SmootherGrid, gamma: float = 0.5) -> PenaltyTable:
    """Compute the penalty table of an ordered grid.

    Requires gamma > 0 and a maximal-smoothing row with a nonzero variance
    scale.  Rows whose scale falls strictly below row 0's are rejected (the
    grid ordering is broken); rows equal to it take mu = qcirc = 0 without
    root solving.  In an ordered grid, rows with equal scales are identical
    weight rows, so equal scales get bit-identical (d, mu, qcirc) values.
    """
    if not (float(gamma) > 0.0):
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    gamma = float(gamma)
    spectrum = grid.spectrum
    g_count = grid.size
    d = np.empty(g_count)
    mu = np.zeros(g_count)
    qc = np.zeros(g_count)
    pen = np.empty(g_count)
    for g in range(g_count):
        d[g] = variance_scale(grid.weights[g], spectrum)
    dbar = d[0]
    if dbar == 0.0:
        raise ValueError(
            "the maximal-smoothing row (row 1) has all-zero weights, so its "
            "variance scale is 0 and no balance target is defined; shrink "
            "the top smoothing level"
        )
    for g in range(g_count):
        if d[g] < dbar:
            raise ValueError(
                f"grid ordering violation: row {g + 1} has variance scale "
                f"{d[g]!r} below row 1's {dbar!r}; row 1 must be the "
                "maximal-smoothing row"
            )
        if d[g] == dbar:
            continue
        rho = noise_profile(grid.weights[g], spectrum, d[g])
        mu[g] = solve_balance(rho, math.log(d[g] / dbar))
        qc[g] = balance_penalty(d[g], mu[g], rho)
    for g in range(g_count):
        pen[g] = penalty_value(grid.weights[g], spectrum, qc[g], gamma)
    return PenaltyTable(
        alphas=grid.alphas, d=d, mu=mu, qcirc=qc, pen=pen, gamma=gamma
    )


@dataclass(frozen=True)
class Diagnostic:
    """One named invariant check: pass/fail plus a counterexample payload."""

    name: str
    passed: bool
    detail: dict


def _rows_payload(rows: list) -> dict:
    return {"rows": rows[:10], "violations": len(rows)}


def table_diagnostics(grid: SmootherGrid, table: PenaltyTable) -> list[Diagnostic]:
    """Run the penalty invariant suite on a built table.

    Checks, per row g with scale D, root mu, penalty Qcirc, and target
    t = log(D / Dbar):

    * ``profile-normalization``: sum rho^2 = 1 within 1e-12,
    * ``root-residual``: |sum T(mu rho) - t| <= 1e-12 * max(1, t),
    * ``log-ratio-bound``: t <= mu * Qcirc / D,
    * ``root-lower-bound``: mu >= min(sqrt(t)/2, 1/4),
    * ``penalty-lower-bound``: Qcirc / Dbar >= (D / Dbar) * sqrt(t),
    * ``ratio-monotone``: for every row pair g1 >= g2 with Qcirc(g2) > 0,
      D(g1)/D(g2) <= Qcirc(g1)/Qcirc(g2),
    * ``penalty-upper-bound``: Qcirc <= (2 D / mu) * t for rows with mu > 0,
    * ``two-sided-sandwich``: D sqrt(t) <= Qcirc <= (2 D / mu) * t.

    All constants are the explicit ones above; the only slack applied is
    floating-point headroom of order 1e-9 relative.
    """
    lam = grid.spectrum.lam
    g_count = table.size
    dbar = table.dbar
    diags: list[Diagnostic] = []

    targets = np.zeros(g_count)
    for g in range(g_count):
        if table.d[g] > dbar:
            targets[g] = math.log(table.d[g] / dbar)

    norm_bad, resid_bad = [], []
    for g in range(g_count):
        h = grid.weights[g]
        if table.d[g] == 0.0:
            continue
        rho = math.sqrt(2.0) * h * (2.0 - h) / (lam * table.d[g])
        norm = _fsum(rho * rho)
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            norm_bad.append({"g": g + 1, "sum_rho_sq": norm})
        if targets[g] > 0.0:
            tol = RESIDUAL_TOL * max(1.0, targets[g])
            x = table.mu[g] * rho
            if float(np.max(x)) >= 0.5:
                # the claimed root sits outside the balance term's domain
                resid_bad.append({"g": g + 1, "residual": math.inf, "tol": tol})
                continue
            resid = abs(_balance_sum_exact(x) - targets[g])
            if resid > tol:
                resid_bad.append({"g": g + 1, "residual": resid, "tol": tol})
    diags.append(Diagnostic("profile-normalization", not norm_bad, _rows_payload(norm_bad)))
    diags.append(Diagnostic("root-residual", not resid_bad, _rows_payload(resid_bad)))

    bad = []
    for g in range(g_count):
        t = targets[g]
        if t == 0.0:
            continue
        rhs = table.mu[g] * table.qcirc[g] / table.d[g]
        if t > rhs + _DIAG_RTOL * max(1.0, t):
            bad.append({"g": g + 1, "target": t, "mu_qcirc_over_d": rhs})
    diags.append(Diagnostic("log-ratio-bound", not bad, _rows_payload(bad)))

    bad = []
    for g in range(g_count):
        t = targets[g]
        if t == 0.0:
            continue
        bound = min(0.5 * math.sqrt(t), 0.25)
        if table.mu[g] < bound * (1.0 - _DIAG_RTOL):
            bad.append({"g": g + 1, "mu": float(table.mu[g]), "bound": bound})
    diags.append(Diagnostic("root-lower-bound", not bad, _rows_payload(bad)))

    bad = []
    for g in range(g_count):
        t = targets[g]
        if t == 0.0:
            continue
        lhs = table.qcirc[g] / dbar
        rhs = (table.d[g] / dbar) * math.sqrt(t)
        if lhs < rhs * (1.0 - _DIAG_RTOL):
            bad.append({"g": g + 1, "qcirc_over_dbar": lhs, "bound": rhs})
    diags.append(Diagnostic("penalty-lower-bound", not bad, _rows_payload(bad)))

    bad = []
    pos = [g for g in range(g_count) if table.qcirc[g] > 0.0]
    for i, g1 in enumerate(pos):
        for g2 in pos[:i]:
            # g1 > g2, both with positive penalty: the scale ratio may not
            # outgrow the penalty ratio
            lhs = table.d[g1] / table.d[g2]
            rhs = table.qcirc[g1] / table.qcirc[g2]
            if lhs > rhs * (1.0 + _DIAG_RTOL):
                bad.append(
                    {"g1": g1 + 1, "g2": g2 + 1, "d_ratio": lhs, "qcirc_ratio": rhs}
                )
    if pos:
        # a zero-penalty row (scale tied with row 0) sorted after a
        # positive-penalty row breaks the same monotonicity
        for g1 in range(pos[0] + 1, g_count):
            if table.qcirc[g1] == 0.0:
                bad.append(
                    {
                        "g1": g1 + 1,
                        "g2": pos[0] + 1,
                        "d_ratio": float(table.d[g1] / table.d[pos[0]]),
                        "qcirc_ratio": 0.0,
                    }
                )
    diags.append(Diagnostic("ratio-monotone", not bad, _rows_payload(bad)))

    bad = []
    for g in range(g_count):
        if table.mu[g] <= 0.0:
            continue
        rhs = (2.0 * table.d[g] / table.mu[g]) * targets[g]
        if table.qcirc[g] > rhs * (1.0 + _DIAG_RTOL):
            bad.append({"g": g + 1, "qcirc": float(table.qcirc[g]), "bound": rhs})
    diags.append(Diagnostic("penalty-upper-bound", not bad, _rows_payload(bad)))

    bad = []
    for g in range(g_count):
        t = targets[g]
        if t == 0.0:
            continue
        lo = table.d[g] * math.sqrt(t)
        hi = (2.0 * table.d[g] / table.mu[g]) * t
        if table.qcirc[g] < lo * (1.0 - _DIAG_RTOL) or table.qcirc[g] > hi * (
            1.0 + _DIAG_RTOL
        ):
            bad.append(
                {"g": g + 1, "lower": lo, "qcirc": float(table.qcirc[g]), "upper": hi}
            )
    diags.append(Diagnostic("two-sided-sandwich", not bad, _rows_payload(bad)))

    return diags
