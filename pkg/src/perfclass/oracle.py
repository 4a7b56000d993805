"""Randomized verification of threshold dominance and Monte Carlo simulation.

The dominance and remainder-sign checks are evaluated against exact
CDF-based quantities. The population simulator is an independent route to
the same numbers, used to cross-check the analytic pipeline end to end.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .classifier import (
    ACCURACY,
    Classifier,
    Constant,
    ObjectiveWeights,
    Step,
    acceptance_rates,
    objective_value,
)
from .dist import DEFAULT_NUMERICS, ContinuousDist, NumericsConfig
from .errors import ParameterError
from .model import Environment, make_environment, make_signal_model
from .solver import (
    NEGATIVE,
    POSITIVE,
    ZERO_GAP_TOL,
    remainders_at,
    match_prevalence,
    value_at_prevalence,
)

MATCH_RESIDUAL_TOL = 1e-9
WEIGHT_MODES = ("accuracy", "random", "mixed")


@dataclass(frozen=True)
class TrialConfig:
    n_trials: int = 500
    max_steps: int = 8
    seed: int = 42
    tolerance: float = 1e-8
    weights: str = "mixed"
    cost_mu: tuple = (-2.0, 2.0)
    cost_sigma: tuple = (0.5, 2.0)
    reward: tuple = (0.5, 10.0)
    signal_mu: tuple = (0.5, 2.0)
    signal_sigma: tuple = (0.5, 2.0)

    def __post_init__(self):
        if not isinstance(self.n_trials, int) or self.n_trials < 0:
            raise ParameterError("n_trials must be a non-negative integer")
        if not isinstance(self.max_steps, int) or self.max_steps < 1:
            raise ParameterError("max_steps must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if not (math.isfinite(self.tolerance) and self.tolerance > 0):
            raise ParameterError("tolerance must be positive")
        if self.weights not in WEIGHT_MODES:
            raise ParameterError(f"weights must be one of {WEIGHT_MODES}")
        for name in ("cost_mu", "cost_sigma", "reward", "signal_mu", "signal_sigma"):
            rng = tuple(float(v) for v in getattr(self, name))
            object.__setattr__(self, name, rng)
            if len(rng) != 2 or not rng[0] <= rng[1] or not all(map(math.isfinite, rng)):
                raise ParameterError(f"{name} must be a finite [low, high] pair")
        for name in ("cost_sigma", "reward", "signal_mu", "signal_sigma"):
            if getattr(self, name)[0] <= 0:
                raise ParameterError(f"{name} must be strictly positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


# ---------------------------------------------------------------------------
# samplers


def random_step_classifier(gen: np.random.Generator, k: int, span: tuple) -> Step:
    """Step rule with ``k`` uniform breaks in ``span`` and uniform levels.

    Coincident draws (always the case for a zero-width span) are nudged
    apart by one ulp so breaks stay strictly ascending.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    lo, hi = span
    if hi < lo:
        raise ParameterError("span must satisfy low <= high")
    breaks = np.sort(gen.uniform(lo, hi, k))
    for i in range(1, k):
        if breaks[i] <= breaks[i - 1]:
            breaks[i] = np.nextafter(breaks[i - 1], np.inf)
    values = gen.uniform(0.0, 1.0, k + 1)
    return Step(tuple(breaks.tolist()), tuple(values.tolist()))


def random_environment(gen: np.random.Generator, cfg: TrialConfig) -> Environment:
    sigma_s = gen.uniform(*cfg.signal_sigma)
    f0 = ContinuousDist("gaussian", 0.0, sigma_s)
    f1 = ContinuousDist("gaussian", gen.uniform(*cfg.signal_mu), sigma_s)
    cost = ContinuousDist("gaussian", gen.uniform(*cfg.cost_mu), gen.uniform(*cfg.cost_sigma))
    r = gen.uniform(*cfg.reward)
    share = gen.uniform()
    return make_environment(cost, share * r, -(1.0 - share) * r, make_signal_model(f0, f1))


def random_weights(gen: np.random.Generator, aligned: bool) -> ObjectiveWeights:
    u = gen.uniform(size=4)
    hi_a, lo_a = max(u[0], u[1]), min(u[0], u[1])
    hi_b, lo_b = max(u[2], u[3]), min(u[2], u[3])
    if aligned:
        return ObjectiveWeights(A1=hi_a, A0=lo_a, B1=hi_b, B0=lo_b)
    return ObjectiveWeights(A1=lo_a, A0=hi_a, B1=lo_b, B0=hi_b)


# ---------------------------------------------------------------------------
# single-classifier checks


@dataclass(frozen=True)
class DominanceCheck:
    passed: bool
    slack: float
    gap: float
    objective: float
    comparator: str
    comparator_value: float
    tau_L: Optional[float] = None
    tau_H: Optional[float] = None
    residual_L: float = 0.0
    residual_H: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def verify_dominance(env: Environment, c: Classifier, w: ObjectiveWeights = ACCURACY,
                     tol: float = 1e-8, cfg: NumericsConfig = DEFAULT_NUMERICS) -> DominanceCheck:
    """Does a matched threshold rule (or a constant, for zero gap) do at least as well as ``c``?

    ``slack`` is the best comparator's payoff minus the payoff of ``c``.
    """
    s = env.signal
    d0, d1 = acceptance_rates(c, s)
    gap = d1 - d0
    own = objective_value(env, c, w)
    if abs(gap) <= ZERO_GAP_TOL:
        accept = objective_value(env, Constant(1.0), w)
        reject = objective_value(env, Constant(0.0), w)
        label, best = ("constant_1", accept) if accept >= reject else ("constant_0", reject)
        return DominanceCheck(best >= own - tol, best - own, gap, own, label, best)

    match = match_prevalence(s, gap, cfg)
    h = float(env.prevalence(gap))
    v_lo = value_at_prevalence(s, match.tau_L, match.family, h, w)
    v_hi = value_at_prevalence(s, match.tau_H, match.family, h, w)
    label, best = ("tau_L", v_lo) if v_lo >= v_hi else ("tau_H", v_hi)
    return DominanceCheck(
        best >= own - tol, best - own, gap, own, label, best,
        match.tau_L, match.tau_H, match.residual_L, match.residual_H,
    )


@dataclass(frozen=True)
class SignCheck:
    passed: bool
    skipped: bool
    family: str = ""
    remainders: dict = field(default_factory=dict)
    equality_residual: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def verify_step2_signs(env: Environment, c: Classifier, tol: float = 1e-8,
                       cfg: NumericsConfig = DEFAULT_NUMERICS) -> SignCheck:
    """Remainder signs at the matched thresholds.

    Positive gap: ``R1+(tau_L) <= 0`` and ``R0+(tau_H) >= 0``. Negative gap:
    ``R1-(tau_L) >= 0`` and ``R0-(tau_H) <= 0``. Also reports the largest
    ``|R1 - R0|`` at the matched thresholds, which must vanish.
    """
    s = env.signal
    d0, d1 = acceptance_rates(c, s)
    gap = d1 - d0
    if abs(gap) <= ZERO_GAP_TOL:
        return SignCheck(passed=True, skipped=True)
    match = match_prevalence(s, gap, cfg)
    rem = {"tau_L": remainders_at(c, s, match.tau_L), "tau_H": remainders_at(c, s, match.tau_H)}
    if gap > 0:
        ok = rem["tau_L"]["R1_plus"] <= tol and rem["tau_H"]["R0_plus"] >= -tol
        side = "plus"
    else:
        ok = rem["tau_L"]["R1_minus"] >= -tol and rem["tau_H"]["R0_minus"] <= tol
        side = "minus"
    eq = max(abs(rem[t][f"R1_{side}"] - rem[t][f"R0_{side}"]) for t in ("tau_L", "tau_H"))
    return SignCheck(
        passed=bool(ok), skipped=False, family=POSITIVE if gap > 0 else NEGATIVE,
        remainders=rem, equality_residual=eq,
    )


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class SimulationResult:
    n: int
    seed: int
    estimates: dict
    standard_errors: dict

    def to_dict(self) -> dict:
        return asdict(self)


def simulate_population(env: Environment, c: Classifier, n: int, seed: int) -> SimulationResult:
    """Simulate ``n`` independent individuals facing classifier ``c``.

    Each draws a cost, best-responds, emits a signal from the matching
    density and receives a randomized decision with probability ``c.prob(x)``.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    gen = np.random.default_rng(seed)
    d0, d1 = acceptance_rates(c, env.signal)
    threshold = env.r * (d1 - d0)

    gamma = env.cost.sample(gen, n)
    beta = threshold >= gamma
    x = np.where(beta, env.signal.f1.sample(gen, n), env.signal.f0.sample(gen, n))
    d = gen.random(n) < c.prob(x)

    counts = {
        "prevalence": np.count_nonzero(beta),
        "tp": np.count_nonzero(beta & d),
        "fn": np.count_nonzero(beta & ~d),
        "fp": np.count_nonzero(~beta & d),
        "tn": np.count_nonzero(~beta & ~d),
    }
    counts["accuracy"] = counts["tp"] + counts["tn"]
    est = {k: v / n for k, v in counts.items()}
    se = {k: math.sqrt(p * (1.0 - p) / n) for k, p in est.items()}
    return SimulationResult(n, seed, est, se)


# ---------------------------------------------------------------------------
# batch driver


@dataclass
class TrialReport:
    config: dict
    trials_run: int = 0
    failures: int = 0
    dominance_failures: int = 0
    sign_failures: int = 0
    equality_failures: int = 0
    residual_failures: int = 0
    ordering_failures: int = 0
    zero_gap_trials: int = 0
    max_slack: float = 0.0
    min_slack: float = math.inf
    max_match_residual: float = 0.0
    max_equality_residual: float = 0.0
    weight_counts: dict = field(default_factory=dict)
    failure_dumps: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(d["min_slack"]):
            d["min_slack"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialReport":
        d = dict(d)
        if d.get("min_slack") is None:
            d["min_slack"] = math.inf
        return cls(**d)


def _weights_for(i: int, mode: str, gen) -> tuple[str, ObjectiveWeights]:
    if mode == "accuracy":
        return "accuracy", ACCURACY
    if mode == "random":
        aligned = i % 2 == 0
        return ("aligned" if aligned else "misaligned"), random_weights(gen, aligned)
    slot = i % 3
    if slot == 0:
        return "accuracy", ACCURACY
    return ("aligned" if slot == 1 else "misaligned"), random_weights(gen, slot == 1)


def run_trial(cfg: TrialConfig, i: int, ncfg: NumericsConfig = DEFAULT_NUMERICS) -> dict:
    """One randomized trial; the generator is derived from ``(seed, i)``."""
    gen = np.random.default_rng([cfg.seed, i])
    env = random_environment(gen, cfg)
    c = random_step_classifier(gen, int(gen.integers(1, cfg.max_steps + 1)), env.signal.span(1e-4))
    label, w = _weights_for(i, cfg.weights, gen)

    dom = verify_dominance(env, c, w, cfg.tolerance, ncfg)
    sign = verify_step2_signs(env, c, cfg.tolerance, ncfg)
    out = {
        "index": i, "weights_label": label, "env": env, "classifier": c, "weights": w,
        "dominance": dom, "signs": sign, "problems": [],
    }
    if not dom.passed:
        out["problems"].append("dominance")
    if not sign.skipped:
        if not sign.passed:
            out["problems"].append("signs")
        if sign.equality_residual > cfg.tolerance:
            out["problems"].append("equality")
        if max(dom.residual_L, dom.residual_H) > MATCH_RESIDUAL_TOL:
            out["problems"].append("residual")
        if not (dom.tau_L is not None and dom.tau_L <= env.signal.tau_c <= dom.tau_H):
            out["problems"].append("ordering")
    return out


def run_suite(cfg: TrialConfig, ncfg: NumericsConfig = DEFAULT_NUMERICS) -> TrialReport:
    report = TrialReport(config=cfg.to_dict())
    field_for = {
        "dominance": "dominance_failures", "signs": "sign_failures",
        "equality": "equality_failures", "residual": "residual_failures",
        "ordering": "ordering_failures",
    }
    for i in range(cfg.n_trials):
        t = run_trial(cfg, i, ncfg)
        dom, sign = t["dominance"], t["signs"]
        report.trials_run += 1
        report.weight_counts[t["weights_label"]] = report.weight_counts.get(t["weights_label"], 0) + 1
        report.max_slack = max(report.max_slack, dom.slack)
        report.min_slack = min(report.min_slack, dom.slack)
        if sign.skipped:
            report.zero_gap_trials += 1
        else:
            report.max_match_residual = max(report.max_match_residual, dom.residual_L, dom.residual_H)
            report.max_equality_residual = max(report.max_equality_residual, sign.equality_residual)
        for p in t["problems"]:
            setattr(report, field_for[p], getattr(report, field_for[p]) + 1)
        if t["problems"]:
            report.failures += 1
            report.failure_dumps.append({
                "index": i,
                "problems": t["problems"],
                "environment": t["env"].to_dict(),
                "classifier": t["classifier"].to_dict(),
                "weights": t["weights"].to_dict(),
                "dominance": dom.to_dict(),
                "signs": sign.to_dict(),
            })
    return report
