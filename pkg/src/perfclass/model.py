"""Game environment: the signal pair, the cost law and the net reward."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import DEFAULT_NUMERICS, ContinuousDist, NumericsConfig, find_root, span_of
from .errors import CrossingNotFoundError, MLRPViolationError, ParameterError, RewardError

MLRP_GRID_N = 1000
_MLRP_SPAN_MASS = 5e-7  # central 1 - 1e-6 of both densities
_STRICT_TOL = 1e-12


@dataclass(frozen=True)
class SignalModel:
    """Signal densities for non-compliers (``f0``) and compliers (``f1``).

    Construct through :func:`make_signal_model`, which checks the strict
    likelihood-ratio ordering and caches the density crossing point.
    """

    f0: ContinuousDist
    f1: ContinuousDist
    tau_c: float

    def span(self, mass: float) -> tuple[float, float]:
        return span_of((self.f0, self.f1), mass)

    def d_max(self) -> float:
        """Largest gap any positive threshold achieves, ``F0(tau_c) - F1(tau_c)``."""
        return float(self.f0.cdf(self.tau_c) - self.f1.cdf(self.tau_c))

    def to_dict(self) -> dict:
        return {"f0": self.f0.to_dict(), "f1": self.f1.to_dict(), "tau_c": self.tau_c}


@dataclass(frozen=True)
class Environment:
    cost: ContinuousDist
    r1: float
    r0: float
    signal: SignalModel

    @property
    def r(self) -> float:
        return self.r1 - self.r0

    def prevalence(self, gap):
        """Probability of compliance when the classifier's gap is ``gap``."""
        return self.cost.cdf(self.r * np.asarray(gap, dtype=float))

    def to_dict(self) -> dict:
        return {
            "cost": self.cost.to_dict(),
            "r1": self.r1,
            "r0": self.r0,
            "r": self.r,
            "signal": self.signal.to_dict(),
        }


def validate_mlrp(f0: ContinuousDist, f1: ContinuousDist, grid_n: int = MLRP_GRID_N,
                  cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Check that ``f1/f0`` is strictly increasing and return the crossing point.

    The log likelihood ratio is evaluated on ``grid_n`` points covering the
    central mass of both densities; every consecutive difference must be
    positive.
    """
    for name, d in (("f0", f0), ("f1", f1)):
        if not d.full_support:
            raise MLRPViolationError(f"{name} of kind {d.kind!r} lacks full support")
    if grid_n < 100:
        raise ParameterError(f"grid_n must be >= 100, got {grid_n}")

    lo, hi = span_of((f0, f1), _MLRP_SPAN_MASS)
    xs = np.linspace(lo, hi, grid_n)
    llr = f1.logpdf(xs) - f0.logpdf(xs)
    steps = np.diff(llr)
    bad = np.nonzero(steps <= _STRICT_TOL)[0]
    if bad.size:
        i = int(bad[0])
        raise MLRPViolationError(
            f"likelihood ratio f1/f0 not strictly increasing on [{xs[i]:.6g}, {xs[i + 1]:.6g}]"
        )

    sign_change = np.nonzero((llr[:-1] < 0) & (llr[1:] >= 0))[0]
    if not sign_change.size:
        raise CrossingNotFoundError(f"f1 - f0 does not change sign on [{lo:.6g}, {hi:.6g}]")
    i = int(sign_change[0])
    return find_root(lambda x: float(f1.logpdf(x) - f0.logpdf(x)), float(xs[i]), float(xs[i + 1]), cfg)


def make_signal_model(f0: ContinuousDist, f1: ContinuousDist, grid_n: int = MLRP_GRID_N,
                      cfg: NumericsConfig = DEFAULT_NUMERICS) -> SignalModel:
    return SignalModel(f0, f1, validate_mlrp(f0, f1, grid_n, cfg))


def make_environment(cost: ContinuousDist, r1: float, r0: float, signal: SignalModel) -> Environment:
    r1, r0 = float(r1), float(r0)
    if not (math.isfinite(r1) and math.isfinite(r0)):
        raise RewardError("rewards must be finite")
    if r1 < 0:
        raise RewardError(f"reward r1 must be >= 0, got {r1}")
    if r0 > 0:
        raise RewardError(f"penalty r0 must be <= 0, got {r0}")
    if not r1 - r0 > 0:
        raise RewardError(f"net reward r = r1 - r0 must be positive, got {r1 - r0}")
    return Environment(cost, r1, r0, signal)


def example_environment(cfg: NumericsConfig = DEFAULT_NUMERICS) -> Environment:
    """Cost N(3/4, 1), r = 5, signals N(0, 1) and N(1, 1)."""
    signal = make_signal_model(ContinuousDist("gaussian", 0.0, 1.0), ContinuousDist("gaussian", 1.0, 1.0), cfg=cfg)
    return make_environment(ContinuousDist("gaussian", 0.75, 1.0), 5.0, 0.0, signal)
