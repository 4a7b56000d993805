import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perfclass.classifier import (
    ACCURACY,
    COMPLIANCE,
    Constant,
    NegativeThreshold,
    ObjectiveWeights,
    PositiveThreshold,
    Step,
    acceptance_rates,
    objective_value,
)
from perfclass.dist import make_dist
from perfclass.errors import InfeasibleGapError, ZeroGapError
from perfclass.model import make_environment
from perfclass.oracle import random_step_classifier
from perfclass.solver import (
    CONSTANT,
    NEGATIVE,
    POSITIVE,
    SolveReport,
    check_conditions,
    gap_of_threshold,
    match_prevalence,
    optimize_family,
    pick_winner,
    remainders_at,
    solve_optimal,
    value_at_prevalence,
)

from conftest import Phi

from test_classifier import step_classifiers


@pytest.fixture(scope="module")
def example_solution(example_env):
    return solve_optimal(example_env)


class TestGapOfThreshold:
    def test_examples(self, unit_signal):
        assert abs(gap_of_threshold(unit_signal, -0.1) - 0.32450610177658834) < 1e-12
        assert abs(gap_of_threshold(unit_signal, -1.4, NEGATIVE) - (-0.07255912330917494)) < 1e-12

    def test_peak(self, unit_signal):
        assert abs(gap_of_threshold(unit_signal, 0.5) - 0.38292492254802624) < 1e-12

    def test_tail_accuracy(self, unit_signal):
        # deep right tail: difference of survival functions stays accurate
        assert gap_of_threshold(unit_signal, 9.0) > 0
        assert abs(gap_of_threshold(unit_signal, 9.0) - (Phi(-8.0) - Phi(-9.0))) < 1e-20

    def test_array(self, unit_signal):
        taus = np.array([-1.0, 0.5, 2.0])
        np.testing.assert_allclose(
            gap_of_threshold(unit_signal, taus), [Phi(-1) - Phi(-2), Phi(0.5) - Phi(-0.5), Phi(2) - Phi(1)],
            atol=1e-14,
        )


class TestMatchPrevalence:
    def test_example_gap(self, unit_signal):
        m = match_prevalence(unit_signal, 0.32450610177658834)
        assert abs(m.tau_L - (-0.1)) < 1e-8
        assert abs(m.tau_H - 1.1) < 1e-8
        assert m.family == POSITIVE and not m.degenerate

    def test_negative_target(self, unit_signal):
        m = match_prevalence(unit_signal, -0.07255912330917494)
        assert abs(m.tau_L - (-1.4)) < 1e-8
        assert abs(m.tau_H - 2.4) < 1e-8
        assert m.family == NEGATIVE
        assert abs(gap_of_threshold(unit_signal, m.tau_L, NEGATIVE) + 0.07255912330917494) <= 1e-9

    def test_degenerate_at_peak(self, unit_signal):
        m = match_prevalence(unit_signal, unit_signal.d_max())
        assert m.degenerate and m.tau_L == m.tau_H == unit_signal.tau_c

    def test_infeasible(self, unit_signal):
        with pytest.raises(InfeasibleGapError):
            match_prevalence(unit_signal, 0.9)

    def test_zero_gap(self, unit_signal):
        with pytest.raises(ZeroGapError):
            match_prevalence(unit_signal, 0.0)

    def test_tiny_gap_needs_expansion(self, unit_signal):
        m = match_prevalence(unit_signal, 1e-9)
        assert m.residual_L <= 1e-9 and m.residual_H <= 1e-9
        assert m.tau_L < -5 and m.tau_H > 6

    @settings(max_examples=150, deadline=None)
    @given(frac=st.floats(1e-6, 1.0), sign=st.sampled_from([1.0, -1.0]))
    def test_residual_and_ordering(self, unit_signal, frac, sign):
        target = sign * frac * unit_signal.d_max()
        m = match_prevalence(unit_signal, target)
        family = POSITIVE if sign > 0 else NEGATIVE
        for t in (m.tau_L, m.tau_H):
            assert abs(gap_of_threshold(unit_signal, t, family) - target) <= 1e-9
        assert m.tau_L <= unit_signal.tau_c <= m.tau_H


class TestOptimizeFamily:
    def test_example_positive(self, example_env):
        opt, taus, curve = optimize_family(example_env, ACCURACY, POSITIVE)
        assert abs(opt.tau - (-0.1022)) < 1e-3
        assert abs(opt.value - 0.7869549) < 1e-6
        assert opt.value >= curve.max() - 1e-12
        assert len(taus) == len(curve) == 2001

    def test_example_negative(self, example_env):
        opt, _, curve = optimize_family(example_env, ACCURACY, NEGATIVE)
        assert abs(opt.tau - (-1.4148)) < 1e-3
        assert abs(opt.value - 0.79818) < 1e-5
        assert abs(opt.evaluation.prevalence - 0.13491) < 1e-4
        assert opt.value >= curve.max() - 1e-12

    def test_brute_force_agrees(self, example_env):
        taus = np.arange(-3.0, 3.0, 1e-4)
        for family, clf in ((POSITIVE, PositiveThreshold), (NEGATIVE, NegativeThreshold)):
            opt, _, _ = optimize_family(example_env, ACCURACY, family)
            sample = taus[::50]
            best = max(objective_value(example_env, clf(float(t)), ACCURACY) for t in sample)
            assert opt.value >= best - 1e-10

    def test_compliance_peaks_at_crossing(self, example_env):
        opt, _, _ = optimize_family(example_env, COMPLIANCE, POSITIVE)
        assert abs(opt.tau - 0.5) <= 1e-4


class TestSolveOptimal:
    def test_builtin_example(self, example_solution):
        r = example_solution
        assert r.winner == NEGATIVE
        assert r.score_monotonicity_violated
        assert r.best_negative.value > r.best_positive.value
        assert isinstance(r.winner_classifier, NegativeThreshold)
        assert not r.guarantee_void and r.warnings == ()
        assert abs(r.tau_c - 0.5) < 1e-9

    def test_compliance(self, example_env):
        r = solve_optimal(example_env, COMPLIANCE)
        assert r.winner == POSITIVE
        assert abs(r.winner_classifier.tau - 0.5) <= 1e-4
        assert not r.score_monotonicity_violated

    def test_cheap_cost_accepts_everyone(self, unit_signal):
        env = make_environment(make_dist("gaussian", loc=-50, scale=1), 5.0, 0.0, unit_signal)
        r = solve_optimal(env)
        assert r.winner == CONSTANT
        assert r.winner_classifier == Constant(1.0)
        assert abs(r.winner_value - 1.0) < 1e-12

    def test_expensive_cost_rejects_everyone(self, unit_signal):
        env = make_environment(make_dist("gaussian", loc=50, scale=1), 5.0, 0.0, unit_signal)
        r = solve_optimal(env)
        assert r.winner == CONSTANT
        assert r.winner_classifier == Constant(0.0)

    def test_neither_weights_warn(self, example_env):
        r = solve_optimal(example_env, ObjectiveWeights(A1=1, A0=0, B1=0, B0=1))
        assert r.guarantee_void
        assert len(r.warnings) == 1

    def test_curve_shape(self, example_solution):
        taus = [p.tau for p in example_solution.curve]
        assert len(taus) == 2001 and all(b > a for a, b in zip(taus, taus[1:]))
        for p in example_solution.curve[::97]:
            assert p.gap_neg == -p.gap_pos

    def test_report_roundtrip(self, example_solution):
        d = json.loads(json.dumps(example_solution.to_dict()))
        assert SolveReport.from_dict(d) == example_solution

    def test_beats_random_steps(self, example_env, example_solution):
        gen = np.random.default_rng(7)
        span = example_env.signal.span(1e-4)
        best = 0.0
        for _ in range(10_000):
            c = random_step_classifier(gen, int(gen.integers(1, 9)), span)
            best = max(best, objective_value(example_env, c, ACCURACY))
        assert example_solution.winner_value >= best - 1e-8


class TestPickWinner:
    @pytest.mark.parametrize("pos, neg, const, expected", [
        (0.8, 0.7, 0.5, POSITIVE),
        (0.7, 0.8, 0.5, NEGATIVE),
        (0.8, 0.8 + 5e-11, 0.5, POSITIVE),
        (0.8, 0.7, 0.8 - 5e-11, CONSTANT),
        (0.8, 0.9, 0.9, CONSTANT),
        (0.8, 0.7, 0.79, POSITIVE),
    ])
    def test_ties(self, pos, neg, const, expected):
        assert pick_winner(pos, neg, const) == expected


class TestCheckConditions:
    STEP_UP = Step((-1.0, 1.0), (0.2, 0.5, 0.9))
    STEP_DOWN = Step((-1.0, 1.0), (0.9, 0.5, 0.2))

    def test_increasing_step(self, example_env):
        rep = check_conditions(example_env, self.STEP_UP)
        assert rep.family == POSITIVE
        assert abs(rep.gap - 0.17731) < 1e-5
        assert abs(rep.match.tau_L - (-0.79344)) < 1e-5
        assert abs(rep.match.tau_H - 1.79344) < 1e-5
        assert abs(rep.remainders["tau_L"]["R1_plus"] - (-0.2704)) < 1e-4
        assert abs(rep.remainders["tau_H"]["R0_plus"] - 0.4794) < 1e-4
        assert rep.holds and all(rep.sign_claims.values())
        assert max(rep.margins.values()) >= 0

    def test_decreasing_step(self, example_env):
        rep = check_conditions(example_env, self.STEP_DOWN)
        assert rep.family == NEGATIVE
        assert abs(rep.remainders["tau_L"]["R1_minus"] - 0.3299) < 1e-4
        assert abs(rep.remainders["tau_H"]["R0_minus"] - (-0.4550)) < 1e-4
        assert rep.holds and all(rep.sign_claims.values())

    def test_threshold_matches_itself(self, example_env):
        rep = check_conditions(example_env, PositiveThreshold(-0.1))
        assert abs(rep.match.tau_L - (-0.1)) < 1e-8
        assert abs(rep.margins["tau_L"]) < 1e-8

    def test_compliance_notice(self, example_env):
        rep = check_conditions(example_env, self.STEP_UP, COMPLIANCE)
        assert rep.coefficient == 0.0 and rep.notice is not None and rep.holds

    def test_zero_gap(self, example_env):
        with pytest.raises(ZeroGapError):
            check_conditions(example_env, Constant(0.5))

    @settings(max_examples=60, deadline=None)
    @given(c=step_classifiers(max_k=6), aligned=st.booleans(),
           a=st.floats(0, 3), b=st.floats(0, 3), base=st.floats(-2, 2))
    def test_dominance_property(self, example_env, c, aligned, a, b, base):
        d0, d1 = acceptance_rates(c, example_env.signal)
        if abs(d1 - d0) <= 1e-6:
            return
        sign = 1 if aligned else -1
        w = ObjectiveWeights(A1=base + sign * a, A0=base, B1=base + sign * b, B0=base)
        rep = check_conditions(example_env, c, w)
        s = example_env.signal
        for key in ("tau_L", "tau_H"):
            r = rep.remainders[key]
            suffix = "plus" if rep.family == POSITIVE else "minus"
            assert abs(r[f"R1_{suffix}"] - r[f"R0_{suffix}"]) <= 1e-8
        assert rep.holds
        assert max(rep.margins.values()) >= -1e-8
        # the matched rule evaluated at its own induced prevalence is the same payoff
        t = rep.match.tau_L
        assert abs(value_at_prevalence(s, t, rep.family, rep.prevalence, w) - rep.margins["tau_L"]
                   - rep.objective_value) < 1e-12


class TestRemaindersAt:
    def test_keys(self, unit_signal):
        r = remainders_at(Constant(1.0), unit_signal, 0.0)
        assert set(r) == {"R0_plus", "R1_plus", "R0_minus", "R1_minus"}
        assert abs(r["R0_plus"] - 0.5) < 1e-15
        assert abs(r["R0_minus"] - 0.5) < 1e-15
