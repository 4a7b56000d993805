"""Optimal threshold and negative-threshold rules.

A classifier's behaviour-relevant content is its gap (complier minus
non-complier acceptance rate). Every nonzero gap is reproduced by exactly two
thresholds straddling the density crossing point; :func:`match_prevalence`
finds them. :func:`solve_optimal` scans both threshold families plus the two
constant rules and reports the best.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classifier import (
    ACCURACY,
    MINUS,
    NEITHER,
    PLUS,
    Classifier,
    Constant,
    Evaluation,
    NegativeThreshold,
    ObjectiveWeights,
    PositiveThreshold,
    acceptance_rates,
    evaluate,
    objective_value,
    remainder,
    weighted_value,
)
from .dist import DEFAULT_NUMERICS, NumericsConfig, find_root, maximize_1d
from .errors import InfeasibleGapError, NumericsError, ZeroGapError
from .model import Environment, SignalModel

POSITIVE = "positive"
NEGATIVE = "negative"
CONSTANT = "constant"
FAMILIES = (POSITIVE, NEGATIVE)

ZERO_GAP_TOL = 1e-12
DMAX_TOL = 1e-12
TIE_TOL = 1e-10
FLAT_TOL = 1e-12
# far scan edge used when a family optimum sits on the regular grid boundary
_FAR_TAIL = 1e-15
_MAX_EXPANSIONS = 64


def gap_of_threshold(s: SignalModel, tau, family: str = POSITIVE):
    """Gap of the threshold rule at ``tau``.

    Positive family: ``F0(tau) - F1(tau)``; negative family is its negation.
    Upper-tail differences are used right of the crossing point so small gaps
    keep full relative precision. Accepts scalars or arrays.
    """
    tau = np.asarray(tau, dtype=float)
    upper = s.f1.sf(tau) - s.f0.sf(tau)
    lower = s.f0.cdf(tau) - s.f1.cdf(tau)
    d = np.where(tau >= s.tau_c, upper, lower)
    d = d if d.ndim else float(d)
    if family == POSITIVE:
        return d
    if family == NEGATIVE:
        return -d
    raise ValueError(f"family must be 'positive' or 'negative', got {family!r}")


def threshold_rates(s: SignalModel, tau, family: str):
    """Acceptance rates ``(q0, q1)`` of the family's rule at ``tau``."""
    if family == POSITIVE:
        return s.f0.sf(tau), s.f1.sf(tau)
    return s.f0.cdf(tau), s.f1.cdf(tau)


def make_threshold(family: str, tau: float) -> Classifier:
    return PositiveThreshold(tau) if family == POSITIVE else NegativeThreshold(tau)


# ---------------------------------------------------------------------------
# prevalence matching


@dataclass(frozen=True)
class PrevalenceMatch:
    target_gap: float
    tau_L: float
    tau_H: float
    degenerate: bool
    residual_L: float
    residual_H: float

    @property
    def family(self) -> str:
        return POSITIVE if self.target_gap > 0 else NEGATIVE

    def to_dict(self) -> dict:
        return {
            "target_gap": self.target_gap, "tau_L": self.tau_L, "tau_H": self.tau_H,
            "degenerate": self.degenerate, "family": self.family,
            "residual_L": self.residual_L, "residual_H": self.residual_H,
        }


def _expand(s: SignalModel, edge: float, level: float) -> float:
    for _ in range(_MAX_EXPANSIONS):
        if gap_of_threshold(s, edge) <= level:
            return edge
        edge = s.tau_c + 2.0 * (edge - s.tau_c)
    raise NumericsError(f"could not bracket a threshold with gap {level:.3g}", estimate=edge)


def match_prevalence(s: SignalModel, target_gap: float,
                     cfg: NumericsConfig = DEFAULT_NUMERICS) -> PrevalenceMatch:
    """Thresholds ``tau_L <= tau_c <= tau_H`` whose rules have gap ``target_gap``.

    Positive-family rules for a positive target, negative-family rules for a
    negative one. Both families share the same two cut points because their
    gaps differ only in sign.
    """
    if abs(target_gap) <= ZERO_GAP_TOL:
        raise ZeroGapError("target gap is zero; the optimum is a constant rule")
    level = abs(target_gap)
    d_max = s.d_max()
    if level > d_max + DMAX_TOL:
        raise InfeasibleGapError(f"|gap| = {level:.6g} exceeds the largest threshold gap {d_max:.6g}")
    family = POSITIVE if target_gap > 0 else NEGATIVE
    if level >= d_max - DMAX_TOL:
        res = abs(gap_of_threshold(s, s.tau_c, family) - target_gap)
        return PrevalenceMatch(target_gap, s.tau_c, s.tau_c, True, res, res)

    lo_edge, hi_edge = s.span(cfg.grid_tail)
    lo = _expand(s, min(lo_edge, s.tau_c - 1.0), level)
    hi = _expand(s, max(hi_edge, s.tau_c + 1.0), level)

    def excess(t):
        return gap_of_threshold(s, t) - level

    tau_L = find_root(excess, lo, s.tau_c, cfg)
    tau_H = find_root(excess, s.tau_c, hi, cfg)
    return PrevalenceMatch(
        target_gap, tau_L, tau_H, False,
        abs(gap_of_threshold(s, tau_L, family) - target_gap),
        abs(gap_of_threshold(s, tau_H, family) - target_gap),
    )


def value_at_prevalence(s: SignalModel, tau: float, family: str, h: float,
                        w: ObjectiveWeights = ACCURACY) -> float:
    """Payoff of the family's rule at ``tau`` with prevalence held at ``h``."""
    q0, q1 = threshold_rates(s, tau, family)
    return float(weighted_value(h, q0, q1, w))


# ---------------------------------------------------------------------------
# family optimization


def family_objective(env: Environment, w: ObjectiveWeights, family: str, tau):
    """Payoff of the family's rule at ``tau`` with its own induced prevalence."""
    s = env.signal
    q0, q1 = threshold_rates(s, tau, family)
    h = env.prevalence(gap_of_threshold(s, tau, family))
    v = weighted_value(h, q0, q1, w)
    return float(v) if np.ndim(v) == 0 else v


@dataclass(frozen=True)
class FamilyOptimum:
    family: str
    tau: float
    value: float
    evaluation: Evaluation
    flat: bool = False

    def to_dict(self) -> dict:
        return {
            "family": self.family, "tau": self.tau, "value": self.value,
            "evaluation": self.evaluation.to_dict(), "flat": self.flat,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FamilyOptimum":
        return cls(d["family"], d["tau"], d["value"], Evaluation.from_dict(d["evaluation"]), d["flat"])


def scan_grid(env: Environment, cfg: NumericsConfig = DEFAULT_NUMERICS) -> np.ndarray:
    lo, hi = env.signal.span(cfg.grid_tail)
    return np.linspace(lo, hi, cfg.opt_grid_n)


def optimize_family(env: Environment, w: ObjectiveWeights, family: str,
                    cfg: NumericsConfig = DEFAULT_NUMERICS) -> tuple[FamilyOptimum, np.ndarray, np.ndarray]:
    """Best rule within one threshold family.

    Returns the optimum together with the scan grid and the sampled curve.
    When the scan peaks on a grid edge the search continues outward to the
    ``1e-15`` quantiles, since the payoff can keep rising slightly beyond the
    regular span before decaying to the constant-rule limit.
    """
    taus = scan_grid(env, cfg)
    curve = family_objective(env, w, family, taus)

    def fn(t):
        return family_objective(env, w, family, t)

    tau, value = maximize_1d(fn, float(taus[0]), float(taus[-1]), cfg)
    step = taus[1] - taus[0]
    far_lo, far_hi = env.signal.span(_FAR_TAIL)
    if tau <= taus[0] + step and far_lo < taus[0]:
        t2, v2 = maximize_1d(fn, far_lo, float(taus[0] + step), cfg)
        if v2 > value:
            tau, value = t2, v2
    if tau >= taus[-1] - step and far_hi > taus[-1]:
        t2, v2 = maximize_1d(fn, float(taus[-1] - step), far_hi, cfg)
        if v2 > value:
            tau, value = t2, v2

    flat = int(np.count_nonzero(curve >= curve.max() - FLAT_TOL)) > 1
    opt = FamilyOptimum(family, tau, value, evaluate(env, make_threshold(family, tau)), flat)
    return opt, taus, curve


# ---------------------------------------------------------------------------
# full solve


@dataclass(frozen=True)
class CurvePoint:
    tau: float
    gap_pos: float
    gap_neg: float
    prevalence_pos: float
    prevalence_neg: float
    value_pos: float
    value_neg: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ConstantOptimum:
    p: float
    value: float

    def to_dict(self) -> dict:
        return {"p": self.p, "value": self.value}


@dataclass(frozen=True)
class SolveReport:
    best_positive: FamilyOptimum
    best_negative: FamilyOptimum
    best_constant: ConstantOptimum
    winner: str
    winner_classifier: Classifier
    winner_value: float
    objective: ObjectiveWeights
    score_monotonicity_violated: bool
    guarantee_void: bool
    tau_c: float
    d_max: float
    curve: tuple = ()
    warnings: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self, include_curve: bool = True) -> dict:
        d = {
            "best_positive": self.best_positive.to_dict(),
            "best_negative": self.best_negative.to_dict(),
            "best_constant": self.best_constant.to_dict(),
            "winner": self.winner,
            "winner_classifier": self.winner_classifier.to_dict(),
            "winner_value": self.winner_value,
            "objective": self.objective.to_dict(),
            "score_monotonicity_violated": self.score_monotonicity_violated,
            "guarantee_void": self.guarantee_void,
            "tau_c": self.tau_c,
            "d_max": self.d_max,
            "warnings": list(self.warnings),
            "diagnostics": dict(self.diagnostics),
        }
        if include_curve:
            d["curve"] = [p.to_dict() for p in self.curve]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SolveReport":
        from .classifier import classifier_from_dict

        return cls(
            best_positive=FamilyOptimum.from_dict(d["best_positive"]),
            best_negative=FamilyOptimum.from_dict(d["best_negative"]),
            best_constant=ConstantOptimum(**d["best_constant"]),
            winner=d["winner"],
            winner_classifier=classifier_from_dict(d["winner_classifier"]),
            winner_value=d["winner_value"],
            objective=ObjectiveWeights.from_dict(d["objective"]),
            score_monotonicity_violated=d["score_monotonicity_violated"],
            guarantee_void=d["guarantee_void"],
            tau_c=d["tau_c"],
            d_max=d["d_max"],
            curve=tuple(CurvePoint(**p) for p in d.get("curve", [])),
            warnings=tuple(d["warnings"]),
            diagnostics=dict(d["diagnostics"]),
        )


def pick_winner(positive: float, negative: float, constant: float, tol: float = TIE_TOL) -> str:
    """Label of the best family.

    Near-ties (within ``tol``) go to the positive rule over the negative one,
    and to the constant rule over either threshold family: the constants are
    the limits of both families and are trivially score-monotone.
    """
    family, best = (NEGATIVE, negative) if negative > positive + tol else (POSITIVE, positive)
    return CONSTANT if constant >= best - tol else family


def solve_optimal(env: Environment, w: ObjectiveWeights = ACCURACY,
                  cfg: NumericsConfig = DEFAULT_NUMERICS) -> SolveReport:
    s = env.signal
    pos, taus, value_pos = optimize_family(env, w, POSITIVE, cfg)
    neg, _, value_neg = optimize_family(env, w, NEGATIVE, cfg)

    accept = objective_value(env, Constant(1.0), w)
    reject = objective_value(env, Constant(0.0), w)
    const = ConstantOptimum(1.0, accept) if accept >= reject else ConstantOptimum(0.0, reject)

    winner = pick_winner(pos.value, neg.value, const.value)
    if winner == CONSTANT:
        clf, value = Constant(const.p), const.value
    else:
        best = pos if winner == POSITIVE else neg
        clf, value = make_threshold(winner, best.tau), best.value

    warnings = []
    guarantee_void = w.alignment == NEITHER
    if guarantee_void:
        warnings.append(
            "weights are neither accuracy-aligned nor misaligned; "
            "optimality of threshold rules is not guaranteed"
        )
    diagnostics = {"alignment": w.alignment}
    for opt in (pos, neg):
        if opt.flat:
            diagnostics[f"{opt.family}_flat_optimum"] = (
                "several grid points attain the maximum; the smallest tau is reported"
            )

    gap_pos = gap_of_threshold(s, taus, POSITIVE)
    prev_pos = env.prevalence(gap_pos)
    prev_neg = env.prevalence(-gap_pos)
    curve = tuple(
        CurvePoint(float(t), float(g), float(-g), float(hp), float(hn), float(vp), float(vn))
        for t, g, hp, hn, vp, vn in zip(taus, gap_pos, prev_pos, prev_neg, value_pos, value_neg)
    )
    return SolveReport(
        best_positive=pos,
        best_negative=neg,
        best_constant=const,
        winner=winner,
        winner_classifier=clf,
        winner_value=value,
        objective=w,
        score_monotonicity_violated=winner == NEGATIVE,
        guarantee_void=guarantee_void,
        tau_c=s.tau_c,
        d_max=s.d_max(),
        curve=curve,
        warnings=tuple(warnings),
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# dominance conditions


@dataclass(frozen=True)
class ConditionReport:
    """Which matched threshold weakly dominates a given classifier, and why.

    ``coefficient`` is ``(1-H)(B1-B0) - H(A1-A0)``; the matched rule at a
    threshold with common remainder ``R`` beats the classifier by
    ``coefficient * R``. ``pivot`` is the prevalence at which the coefficient
    changes sign.
    """

    family: str
    gap: float
    prevalence: float
    objective_value: float
    match: PrevalenceMatch
    remainders: dict
    coefficient: float
    pivot: Optional[float]
    margins: dict
    branches: tuple
    sign_claims: dict
    notice: Optional[str] = None

    @property
    def holds(self) -> bool:
        return bool(self.branches)

    def to_dict(self) -> dict:
        return {
            "family": self.family, "gap": self.gap, "prevalence": self.prevalence,
            "objective_value": self.objective_value, "match": self.match.to_dict(),
            "remainders": self.remainders, "coefficient": self.coefficient,
            "pivot": self.pivot, "margins": self.margins, "branches": list(self.branches),
            "holds": self.holds, "sign_claims": self.sign_claims, "notice": self.notice,
        }


def remainders_at(c: Classifier, s: SignalModel, tau: float) -> dict:
    return {
        "R0_plus": remainder(c, s, tau, PLUS, 0),
        "R1_plus": remainder(c, s, tau, PLUS, 1),
        "R0_minus": remainder(c, s, tau, MINUS, 0),
        "R1_minus": remainder(c, s, tau, MINUS, 1),
    }


def check_conditions(env: Environment, c: Classifier, w: ObjectiveWeights = ACCURACY,
                     cfg: NumericsConfig = DEFAULT_NUMERICS, tol: float = 1e-10) -> ConditionReport:
    """Evaluate the remainder-sign conditions under which a matched threshold
    rule is at least as good as ``c``.

    Raises :class:`ZeroGapError` when ``c`` has zero gap; that case is
    settled by the constant rules instead.
    """
    s = env.signal
    d0, d1 = acceptance_rates(c, s)
    gap = d1 - d0
    if abs(gap) <= ZERO_GAP_TOL:
        raise ZeroGapError("classifier has zero gap; compare against constant rules")
    match = match_prevalence(s, gap, cfg)
    family = match.family
    h = float(env.prevalence(gap))
    own = float(weighted_value(h, d0, d1, w))

    rem = {"tau_L": remainders_at(c, s, match.tau_L), "tau_H": remainders_at(c, s, match.tau_H)}
    a, b = w.A1 - w.A0, w.B1 - w.B0
    coef = (1.0 - h) * b - h * a
    pivot = b / (a + b) if a + b != 0 else None
    notice = None
    if a == 0 and b == 0:
        notice = "compliance case: payoff depends on prevalence only; matched rules tie with the classifier"
    elif pivot is None:
        notice = "pivot undefined (A1 - A0 + B1 - B0 = 0); the coefficient sign is fixed"

    margins = {
        "tau_L": value_at_prevalence(s, match.tau_L, family, h, w) - own,
        "tau_H": value_at_prevalence(s, match.tau_H, family, h, w) - own,
    }

    # the rule at tau_H (positive) or tau_L (negative) has R >= 0 and wins when coef >= 0
    if family == POSITIVE:
        up = ("tau_H", "R0_plus", rem["tau_H"]["R0_plus"] >= -tol)
        down = ("tau_L", "R1_plus", rem["tau_L"]["R1_plus"] <= tol)
        sign_claims = {"R1_plus(tau_L)<=0": down[2], "R0_plus(tau_H)>=0": up[2]}
    else:
        up = ("tau_L", "R1_minus", rem["tau_L"]["R1_minus"] >= -tol)
        down = ("tau_H", "R0_minus", rem["tau_H"]["R0_minus"] <= tol)
        sign_claims = {"R1_minus(tau_L)>=0": up[2], "R0_minus(tau_H)<=0": down[2]}

    branches = []
    if coef >= 0 and up[2]:
        branches.append(f"coefficient>=0 and {up[1]}({up[0]})>=0")
    if coef <= 0 and down[2]:
        branches.append(f"coefficient<=0 and {down[1]}({down[0]})<=0")

    return ConditionReport(
        family=family, gap=gap, prevalence=h, objective_value=own, match=match,
        remainders=rem, coefficient=coef, pivot=pivot, margins=margins,
        branches=tuple(branches), sign_claims=sign_claims, notice=notice,
    )

