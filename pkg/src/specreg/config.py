"""Experiment configuration: a JSON-serializable description of a full run.

A config names a spectrum, a smoother family, a grid discretization, the
penalty inflation gamma, the noise level, a ground-truth signal, and the
replication count and seed.  ``to_dict``/``from_dict`` round-trip losslessly
(floats serialize via their shortest exact decimal form), and the dict form
is what the command-line layer echoes into every output artifact, so
re-running from an echo reproduces the artifact byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .evaluation import SignalSpec, build_signal
from .penalty import build_table
from .smoothers import (
    GridSpec,
    SmootherFamily,
    build_grid,
    explicit_grid,
)
from .spectra import (
    Spectrum,
    make_exponential_spectrum,
    make_polynomial_spectrum,
    read_spectrum_csv,
    validate,
)

__all__ = [
    "SpectrumConfig",
    "ExperimentConfig",
    "materialize",
    "builtin_configs",
]


def _require_keys(data: dict, allowed: set, where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"{where}: unknown keys {sorted(unknown)}")


@dataclass(frozen=True)
class SpectrumConfig:
    """Where the eigenvalues come from: a generator family, explicit
    values, or a CSV file."""

    kind: str
    n: int = 0
    beta: float = 0.0
    values: Optional[tuple] = None
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("polynomial", "exponential", "explicit", "csv"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.kind in ("polynomial", "exponential") and int(self.n) < 1:
            raise ValueError(f"spectrum n must be >= 1, got {self.n!r}")
        if self.kind == "explicit" and self.values is None:
            raise ValueError("explicit spectrum needs values")
        if self.kind == "csv" and not self.path:
            raise ValueError("csv spectrum needs a path")
        if self.values is not None:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def to_dict(self) -> dict:
        if self.kind == "explicit":
            return {"kind": self.kind, "values": list(self.values)}
        if self.kind == "csv":
            return {"kind": self.kind, "path": self.path}
        return {"kind": self.kind, "n": int(self.n), "beta": float(self.beta)}

    @staticmethod
    def from_dict(data: dict) -> "SpectrumConfig":
        _require_keys(data, {"kind", "n", "beta", "values", "path"}, "spectrum")
        return SpectrumConfig(
            kind=data.get("kind", ""),
            n=data.get("n", 0),
            beta=data.get("beta", 0.0),
            values=tuple(data["values"]) if "values" in data else None,
            path=data.get("path"),
        )

    def build(self) -> Spectrum:
        if self.kind == "polynomial":
            return make_polynomial_spectrum(self.n, self.beta)
        if self.kind == "exponential":
            return make_exponential_spectrum(self.n, self.beta)
        if self.kind == "explicit":
            return validate(self.values)
        return read_spectrum_csv(self.path)


def _family_to_dict(fam: SmootherFamily) -> dict:
    out: dict = {"kind": fam.kind}
    if fam.kind == "tikhonov":
        out["order"] = fam.order
    elif fam.kind == "landweber":
        if fam.step is not None:
            out["step"] = fam.step
        else:
            out["step_factor"] = fam.step_factor
    elif fam.kind == "pinsker":
        out["nu"] = fam.nu
    return out


def _family_from_dict(data: dict) -> SmootherFamily:
    _require_keys(data, {"kind", "order", "step", "step_factor", "nu"}, "family")
    kwargs = {k: data[k] for k in ("order", "step", "step_factor", "nu") if k in data}
    return SmootherFamily(kind=data.get("kind", ""), **kwargs)


def _grid_to_dict(spec: GridSpec) -> dict:
    out: dict = {"kind": spec.kind}
    if spec.kind in ("natural", "geometric"):
        out["count"] = spec.count
    if spec.kind == "geometric":
        if spec.alpha_min is not None:
            out["alpha_min"] = spec.alpha_min
        if spec.alpha_max is not None:
            out["alpha_max"] = spec.alpha_max
    if spec.kind == "explicit":
        out["values"] = list(spec.values) if spec.values is not None else []
        if spec.weights is not None:
            out["weights"] = [list(row) for row in spec.weights]
    return out


def _grid_from_dict(data: dict) -> GridSpec:
    _require_keys(
        data, {"kind", "count", "alpha_min", "alpha_max", "values", "weights"}, "grid"
    )
    return GridSpec(
        kind=data.get("kind", "natural"),
        count=data.get("count", 100),
        alpha_min=data.get("alpha_min"),
        alpha_max=data.get("alpha_max"),
        values=tuple(data["values"]) if data.get("values") is not None else None,
        weights=tuple(tuple(r) for r in data["weights"])
        if data.get("weights") is not None
        else None,
    )


def _signal_to_dict(sig: SignalSpec) -> dict:
    if sig.kind == "zero":
        return {"kind": "zero"}
    if sig.kind == "power":
        return {"kind": "power", "s": sig.s}
    if sig.kind == "spike":
        return {"kind": "spike", "j": int(sig.j), "w": sig.w}
    if sig.kind == "ellipsoid":
        return {
            "kind": "ellipsoid",
            "radius": sig.radius,
            "nu": sig.nu,
            "seed": int(sig.seed),
        }
    return {"kind": "explicit", "values": list(sig.values)}


def _signal_from_dict(data: dict) -> SignalSpec:
    _require_keys(
        data, {"kind", "s", "j", "w", "radius", "nu", "seed", "values"}, "signal"
    )
    kwargs = {
        k: data[k] for k in ("s", "j", "w", "radius", "nu", "seed") if k in data
    }
    if "values" in data:
        kwargs["values"] = tuple(data["values"])
    return SignalSpec(kind=data.get("kind", "zero"), **kwargs)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs, in one serializable value."""

    spectrum: SpectrumConfig
    family: SmootherFamily
    grid: GridSpec = GridSpec()
    gamma: float = 0.5
    sigma: float = 0.1
    signal: SignalSpec = SignalSpec()
    n_reps: int = 100
    seed: int = 0

    def __post_init__(self):
        if not (float(self.gamma) > 0.0):
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")
        if float(self.sigma) < 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma!r}")
        if int(self.n_reps) < 1:
            raise ValueError(f"n_reps must be >= 1, got {self.n_reps!r}")
        if int(self.seed) < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed!r}")

    def to_dict(self) -> dict:
        return {
            "spectrum": self.spectrum.to_dict(),
            "family": _family_to_dict(self.family),
            "grid": _grid_to_dict(self.grid),
            "gamma": float(self.gamma),
            "sigma": float(self.sigma),
            "signal": _signal_to_dict(self.signal),
            "n_reps": int(self.n_reps),
            "seed": int(self.seed),
        }

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        _require_keys(
            data,
            {
                "spectrum",
                "family",
                "grid",
                "gamma",
                "sigma",
                "signal",
                "n_reps",
                "seed",
            },
            "config",
        )
        for key in ("spectrum", "family"):
            if key not in data:
                raise ValueError(f"config: missing required section {key!r}")
        return ExperimentConfig(
            spectrum=SpectrumConfig.from_dict(data["spectrum"]),
            family=_family_from_dict(data["family"]),
            grid=_grid_from_dict(data.get("grid", {"kind": "natural"})),
            gamma=data.get("gamma", 0.5),
            sigma=data.get("sigma", 0.1),
            signal=_signal_from_dict(data.get("signal", {"kind": "zero"})),
            n_reps=data.get("n_reps", 100),
            seed=data.get("seed", 0),
        )

    def override(self, seed: Optional[int] = None, n_reps: Optional[int] = None):
        out = self
        if seed is not None:
            out = replace(out, seed=int(seed))
        if n_reps is not None:
            out = replace(out, n_reps=int(n_reps))
        return out


def materialize(config: ExperimentConfig):
    """Build the concrete (spectrum, grid, table, theta) of a config.

    Every referenced parameter is validated by its owning module before any
    computation happens.
    """
    spectrum = config.spectrum.build()
    if config.family.kind == "explicit":
        if config.grid.kind != "explicit" or config.grid.weights is None:
            raise ValueError(
                "an explicit family needs an explicit grid with a weights table"
            )
        values = config.grid.values
        if values is None:
            values = tuple(float(i + 1) for i in range(len(config.grid.weights)))
        grid = explicit_grid(spectrum, values, config.grid.weights)
    else:
        grid = build_grid(config.family, spectrum, config.grid)
    table = build_table(grid, config.gamma)
    theta = build_signal(config.signal, spectrum)
    return spectrum, grid, table, theta


def _head_plateau_values(
    head_count: int,
    head_power: float,
    drop_count: int,
    drop_rate: float,
    tail_count: int,
    tail_floor: float,
) -> tuple:
    """Eigenvalues with a polynomial head, a fast geometric drop, and a long
    near-flat tail easing down to ``tail_floor``.

    The head holds every recoverable coordinate; the tail adds many
    almost-degenerate directions whose reconstruction variance dominates any
    smoother that keeps them.  ``tail_floor`` bounds the condition number:
    empirical risks share a tail term of order sigma^2 * n / tail_floor, so
    the floor must stay large enough that head-scale differences survive
    double-precision rounding.
    """
    head = [float(k) ** -head_power for k in range(1, head_count + 1)]
    values = list(head)
    for i in range(1, drop_count + 1):
        values.append(head[-1] * math.exp(-drop_rate * i))
    drop_end = values[-1]
    tail_rate = math.log(drop_end / tail_floor) / tail_count
    for i in range(1, tail_count + 1):
        values.append(drop_end * math.exp(-tail_rate * i))
    return tuple(values)


def builtin_configs() -> dict:
    """The canned experiment registry swept by the acceptance suite."""
    power1 = SignalSpec(kind="power", s=1.0)
    plateau = SpectrumConfig(
        kind="explicit",
        values=_head_plateau_values(
            head_count=40,
            head_power=2.0,
            drop_count=20,
            drop_rate=0.55,
            tail_count=1000,
            tail_floor=3e-11,
        ),
    )
    configs = {
        "cutoff-identity": ExperimentConfig(
            spectrum=SpectrumConfig(kind="polynomial", n=200, beta=0.0),
            family=SmootherFamily(kind="cutoff"),
            grid=GridSpec(kind="natural"),
            gamma=0.5,
            sigma=0.1,
            signal=power1,
            n_reps=200,
            seed=20260801,
        ),
        "cutoff-poly": ExperimentConfig(
            spectrum=SpectrumConfig(kind="polynomial", n=200, beta=1.0),
            family=SmootherFamily(kind="cutoff"),
            grid=GridSpec(kind="natural"),
            gamma=0.5,
            sigma=0.1,
            signal=power1,
            n_reps=200,
            seed=20260802,
        ),
        "tikhonov-poly": ExperimentConfig(
            spectrum=SpectrumConfig(kind="polynomial", n=500, beta=1.0),
            family=SmootherFamily(kind="tikhonov", order=1),
            grid=GridSpec(kind="geometric", count=60),
            gamma=0.5,
            sigma=0.05,
            signal=power1,
            n_reps=500,
            seed=20260803,
        ),
        "landweber-poly": ExperimentConfig(
            spectrum=SpectrumConfig(kind="polynomial", n=200, beta=1.0),
            family=SmootherFamily(kind="landweber", step_factor=1.1),
            grid=GridSpec(kind="natural", count=80),
            gamma=0.5,
            sigma=0.1,
            signal=power1,
            n_reps=200,
            seed=20260804,
        ),
        "pinsker-exp": ExperimentConfig(
            spectrum=SpectrumConfig(kind="exponential", n=200, beta=0.05),
            family=SmootherFamily(kind="pinsker", nu=1.0),
            grid=GridSpec(kind="geometric", count=60),
            gamma=0.5,
            sigma=0.1,
            signal=power1,
            n_reps=200,
            seed=20260805,
        ),
        "first-order-overpenalized": ExperimentConfig(
            spectrum=plateau,
            family=SmootherFamily(kind="tikhonov", order=1),
            grid=GridSpec(
                kind="geometric", count=80, alpha_min=1e-4, alpha_max=1.0
            ),
            gamma=0.5,
            sigma=0.003,
            signal=SignalSpec(kind="spike", j=2, w=1.5),
            n_reps=400,
            seed=20260806,
        ),
        "second-order-reference": ExperimentConfig(
            spectrum=plateau,
            family=SmootherFamily(kind="tikhonov", order=2),
            grid=GridSpec(
                kind="geometric", count=80, alpha_min=1e-4, alpha_max=1.0
            ),
            gamma=0.5,
            sigma=0.003,
            signal=SignalSpec(kind="spike", j=2, w=1.5),
            n_reps=400,
            seed=20260806,
        ),
        "penalty-bench": ExperimentConfig(
            spectrum=SpectrumConfig(kind="polynomial", n=10_000, beta=1.0),
            family=SmootherFamily(kind="tikhonov", order=1),
            grid=GridSpec(kind="geometric", count=100),
            gamma=0.5,
            sigma=0.05,
            signal=power1,
            n_reps=10,
            seed=20260807,
        ),
        "excess-sup-identity": ExperimentConfig(
            spectrum=SpectrumConfig(kind="polynomial", n=200, beta=0.0),
            family=SmootherFamily(kind="cutoff"),
            grid=GridSpec(kind="natural"),
            gamma=1.0,
            sigma=0.1,
            signal=SignalSpec(kind="zero"),
            n_reps=2000,
            seed=20260808,
        ),
        "excess-sup-poly": ExperimentConfig(
            spectrum=SpectrumConfig(kind="polynomial", n=200, beta=1.0),
            family=SmootherFamily(kind="cutoff"),
            grid=GridSpec(kind="natural"),
            gamma=1.0,
            sigma=0.1,
            signal=SignalSpec(kind="zero"),
            n_reps=2000,
            seed=20260809,
        ),
    }
    return configs
