"""Classifier representations and the quantities they induce in an environment.

All integrals against the signal densities are evaluated exactly through
CDF differences; quadrature is only used by tests as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dist import ContinuousDist
from .errors import ParameterError
from .model import Environment, SignalModel


class Classifier:
    """Base for the four supported rule shapes.

    ``prob(x)`` is the probability of the positive decision at signal ``x``;
    ``accept_rate(dist)`` integrates it against a signal density.
    """

    def prob(self, x):
        raise NotImplementedError

    def accept_rate(self, dist: ContinuousDist) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PositiveThreshold(Classifier):
    """Accept when ``x > tau``."""

    tau: float

    def prob(self, x):
        return (np.asarray(x, dtype=float) > self.tau).astype(float)

    def accept_rate(self, dist):
        return float(dist.sf(self.tau))

    def to_dict(self):
        return {"type": "positive", "tau": self.tau}


@dataclass(frozen=True)
class NegativeThreshold(Classifier):
    """Accept when ``x < tau``."""

    tau: float

    def prob(self, x):
        return (np.asarray(x, dtype=float) < self.tau).astype(float)

    def accept_rate(self, dist):
        return float(dist.cdf(self.tau))

    def to_dict(self):
        return {"type": "negative", "tau": self.tau}


@dataclass(frozen=True)
class Step(Classifier):
    """Piecewise-constant acceptance probability.

    ``values[k]`` applies on ``[breaks[k-1], breaks[k])`` with the outer
    intervals unbounded, so a break point takes the value to its right.
    """

    breaks: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.breaks) + 1:
            raise ParameterError("a step classifier needs len(values) == len(breaks) + 1")
        if not all(math.isfinite(b) for b in self.breaks):
            raise ParameterError("step breaks must be finite")
        if any(b1 <= b0 for b0, b1 in zip(self.breaks, self.breaks[1:])):
            raise ParameterError("step breaks must be strictly ascending")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise ParameterError("step values must lie in [0, 1]")

    def prob(self, x):
        idx = np.searchsorted(np.asarray(self.breaks), np.asarray(x, dtype=float), side="right")
        return np.asarray(self.values)[idx]

    def accept_rate(self, dist):
        edges = np.asarray(self.breaks)
        cdf = np.concatenate(([0.0], dist.cdf(edges), [1.0]))
        return float(np.clip(np.dot(self.values, np.diff(cdf)), 0.0, 1.0))

    def to_dict(self):
        return {"type": "step", "breaks": list(self.breaks), "values": list(self.values)}


@dataclass(frozen=True)
class Constant(Classifier):
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"constant classifier probability must lie in [0, 1], got {self.p}")

    def prob(self, x):
        return np.full(np.shape(x), self.p, dtype=float)

    def accept_rate(self, dist):
        return float(self.p)

    def to_dict(self):
        return {"type": "constant", "p": self.p}


def classifier_from_dict(spec: dict) -> Classifier:
    if not isinstance(spec, dict):
        raise ParameterError("classifier spec must be an object")
    kind = spec.get("type")
    try:
        if kind == "positive":
            return PositiveThreshold(float(spec["tau"]))
        if kind == "negative":
            return NegativeThreshold(float(spec["tau"]))
        if kind == "step":
            return Step(tuple(spec["breaks"]), tuple(spec["values"]))
        if kind == "constant":
            return Constant(float(spec["p"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"malformed {kind} classifier spec: {exc!r}") from None
    raise ParameterError(f"unknown classifier type {kind!r}")


# ---------------------------------------------------------------------------
# objective weights

ALIGNED = "aligned"
MISALIGNED = "misaligned"
NEITHER = "neither"


@dataclass(frozen=True, kw_only=True)
class ObjectiveWeights:
    """Payoffs for the four confusion cells.

    ``A1`` true positive, ``A0`` false negative, ``B1`` true negative,
    ``B0`` false positive.
    """

    A1: float
    A0: float
    B1: float
    B0: float

    def __post_init__(self):
        for name in ("A1", "A0", "B1", "B0"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"weight {name} must be finite")

    @property
    def alignment(self) -> str:
        aligned = self.A1 >= self.A0 and self.B1 >= self.B0
        misaligned = self.A1 <= self.A0 and self.B1 <= self.B0
        # all-equal weights satisfy both; report them as aligned
        if aligned:
            return ALIGNED
        if misaligned:
            return MISALIGNED
        return NEITHER

    def to_dict(self) -> dict:
        return {"A1": self.A1, "A0": self.A0, "B1": self.B1, "B0": self.B0, "alignment": self.alignment}

    @classmethod
    def from_dict(cls, d: dict) -> "ObjectiveWeights":
        return cls(A1=float(d["A1"]), A0=float(d["A0"]), B1=float(d["B1"]), B0=float(d["B0"]))


ACCURACY = ObjectiveWeights(A1=1.0, A0=0.0, B1=1.0, B0=0.0)
COMPLIANCE = ObjectiveWeights(A1=1.0, A0=1.0, B1=0.0, B0=0.0)
PRESETS = {"accuracy": ACCURACY, "compliance": COMPLIANCE}


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class Evaluation:
    delta0: float
    delta1: float
    gap: float
    prevalence: float
    tp: float
    fn_: float
    fp: float
    tn: float
    accuracy: float

    def to_dict(self) -> dict:
        return {
            "delta0": self.delta0, "delta1": self.delta1, "gap": self.gap,
            "prevalence": self.prevalence, "tp": self.tp, "fn": self.fn_,
            "fp": self.fp, "tn": self.tn, "accuracy": self.accuracy,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Evaluation":
        return cls(
            delta0=d["delta0"], delta1=d["delta1"], gap=d["gap"], prevalence=d["prevalence"],
            tp=d["tp"], fn_=d["fn"], fp=d["fp"], tn=d["tn"], accuracy=d["accuracy"],
        )


class Rates(NamedTuple):
    delta0: float
    delta1: float


def classify_prob(c: Classifier, x):
    return c.prob(x)


def acceptance_rates(c: Classifier, s: SignalModel) -> Rates:
    """Acceptance probabilities under the non-complier and complier densities."""
    return Rates(c.accept_rate(s.f0), c.accept_rate(s.f1))


def gap_of(c: Classifier, s: SignalModel) -> float:
    d0, d1 = acceptance_rates(c, s)
    return d1 - d0


def evaluate(env: Environment, c: Classifier) -> Evaluation:
    d0, d1 = acceptance_rates(c, env.signal)
    gap = d1 - d0
    h = float(env.prevalence(gap))
    tp = h * d1
    tn = (1.0 - h) * (1.0 - d0)
    return Evaluation(
        delta0=d0, delta1=d1, gap=gap, prevalence=h,
        tp=tp, fn_=h * (1.0 - d1), fp=(1.0 - h) * d0, tn=tn,
        accuracy=tp + tn,
    )


def weighted_value(h, q0, q1, w: ObjectiveWeights):
    """Confusion-weighted payoff given prevalence and the two acceptance rates.

    Works elementwise on arrays.
    """
    return h * (w.A1 * q1 + w.A0 * (1.0 - q1)) + (1.0 - h) * (w.B1 * (1.0 - q0) + w.B0 * q0)


def objective_value(env: Environment, c: Classifier, w: ObjectiveWeights) -> float:
    d0, d1 = acceptance_rates(c, env.signal)
    h = float(env.prevalence(d1 - d0))
    return float(weighted_value(h, d0, d1, w))


def best_response(gamma: float, env: Environment, c: Classifier) -> int:
    """Comply (1) iff the expected reward gain covers the private cost; ties comply."""
    return int(env.r * gap_of(c, env.signal) >= gamma)


PLUS = "plus"
MINUS = "minus"


def remainder(c: Classifier, s: SignalModel, tau: float, side: str, behavior: int) -> float:
    """Acceptance-rate difference between ``c`` and a threshold rule at ``tau``.

    ``side="plus"`` compares with ``PositiveThreshold(tau)``, ``"minus"`` with
    ``NegativeThreshold(tau)``; ``behavior`` picks the density.
    """
    if behavior not in (0, 1):
        raise ParameterError(f"behavior must be 0 or 1, got {behavior!r}")
    dist = s.f1 if behavior == 1 else s.f0
    rate = c.accept_rate(dist)
    if side == PLUS:
        return rate - float(dist.sf(tau))
    if side == MINUS:
        return rate - float(dist.cdf(tau))
    raise ParameterError(f"side must be 'plus' or 'minus', got {side!r}")
