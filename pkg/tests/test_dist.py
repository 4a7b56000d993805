import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perfclass import dist as dist_mod
from perfclass.dist import (
    ContinuousDist,
    NumericsConfig,
    find_root,
    golden_section_max,
    integrate,
    make_dist,
    maximize_1d,
)
from perfclass.errors import BracketError, NumericsError, ParameterError

from conftest import Phi

CFG = NumericsConfig()

ALL_DISTS = [
    make_dist("gaussian", loc=0.0, scale=1.0),
    make_dist("gaussian", loc=0.75, scale=2.5),
    make_dist("logistic", loc=0.0, scale=1.0),
    make_dist("logistic", loc=-1.0, scale=0.5),
    make_dist("uniform", a=-1.0, b=1.0),
]


class TestMakeDist:
    def test_standard_normal_median(self):
        assert make_dist("gaussian", loc=0, scale=1).cdf(0.0) == 0.5

    @pytest.mark.parametrize("x, expected", [(1.625, 0.81), (-0.36, 0.13)])
    def test_cost_cdf_values(self, x, expected):
        h = make_dist("gaussian", loc=0.75, scale=1.0)
        assert abs(float(h.cdf(x)) - expected) < 5e-3

    @pytest.mark.parametrize("kind, params", [
        ("gaussian", {"loc": 0, "scale": 0}),
        ("logistic", {"loc": 0, "scale": -1}),
        ("uniform", {"a": 1, "b": 1}),
        ("cauchy", {"loc": 0, "scale": 1}),
        ("gaussian", {"loc": 0, "scale": 1, "a": 3}),
    ])
    def test_bad_parameters(self, kind, params):
        with pytest.raises(ParameterError):
            make_dist(kind, **params)

    def test_gaussian_matches_erfc_oracle(self):
        d = make_dist("gaussian", loc=0.75, scale=1.0)
        for x in np.linspace(-5, 5, 41):
            assert abs(float(d.cdf(x)) - Phi(x - 0.75)) < 1e-15
            assert abs(float(d.sf(x)) - Phi(0.75 - x)) < 1e-15


@pytest.mark.parametrize("d", ALL_DISTS, ids=lambda d: f"{d.kind}")
class TestDistInvariants:
    def test_density_integrates_to_one(self, d):
        if d.kind == "uniform":
            total = integrate(lambda x: float(d.pdf(x)), d.a, d.b, CFG)
        else:
            total = integrate(lambda x: float(d.pdf(x)), -math.inf, math.inf, CFG, dists=[d])
        assert abs(total - 1.0) <= 1e-9

    def test_cdf_monotone_with_limits(self, d):
        lo, hi = float(d.quantile(1e-9)), float(d.quantile(1 - 1e-9))
        grid = np.linspace(lo - 1.0, hi + 1.0, 1000)
        assert np.all(np.diff(d.cdf(grid)) >= 0)
        assert float(d.cdf(-1e6)) < 1e-12
        assert float(d.cdf(1e6)) > 1 - 1e-12

    def test_quantile_roundtrip(self, d):
        lo, hi = float(d.quantile(5e-9)), float(d.quantile(1 - 5e-9))
        xs = np.linspace(lo, hi, 501)
        assert np.max(np.abs(d.quantile(d.cdf(xs)) - xs)) <= 1e-7

    def test_density_nonnegative(self, d):
        xs = np.linspace(-30, 30, 2001)
        assert np.all(d.pdf(xs) >= 0)

    def test_sampling_is_seeded(self, d):
        a = d.sample(np.random.default_rng(3), 10)
        b = d.sample(np.random.default_rng(3), 10)
        assert np.array_equal(a, b)


class TestIntegrate:
    g0 = make_dist("gaussian", loc=0.0, scale=1.0)
    g1 = make_dist("gaussian", loc=1.0, scale=1.0)

    def diff(self, x):
        return float(self.g1.pdf(x) - self.g0.pdf(x))

    def test_upper_gap_example(self):
        # r * gap = 1.625 with r = 5
        val = integrate(self.diff, -0.1, math.inf, CFG, dists=[self.g0, self.g1])
        assert abs(val - 0.325) <= 1e-3
        assert abs(val - (Phi(-0.1) - Phi(-1.1))) <= 1e-9

    def test_lower_gap(self):
        val = integrate(self.diff, -math.inf, -1.4, CFG, dists=[self.g0, self.g1])
        assert abs(val - (-0.0725591233)) <= 1e-3
        assert abs(val - (Phi(-2.4) - Phi(-1.4))) <= 1e-9

    def test_polynomial_exact(self):
        assert abs(integrate(lambda x: x ** 3 - x, 0.0, 2.0, CFG) - 2.0) < 1e-12

    def test_empty_interval(self):
        assert integrate(math.sin, 1.0, 1.0, CFG) == 0.0

    def test_reversed_limits(self):
        with pytest.raises(ParameterError):
            integrate(math.sin, 1.0, 0.0, CFG)

    def test_infinite_needs_reference(self):
        with pytest.raises(ParameterError):
            integrate(math.exp, -math.inf, 0.0, CFG)

    def test_nonconvergence_carries_estimate(self, monkeypatch):
        monkeypatch.setattr(dist_mod, "_MAX_DEPTH", 2)
        with pytest.raises(NumericsError) as info:
            integrate(lambda x: 1.0 if x > 0.123 else 0.0, 0.0, 1.0, CFG)
        assert info.value.estimate is not None
        assert abs(info.value.estimate - 0.877) < 0.05


class TestFindRoot:
    def test_linear(self):
        assert abs(find_root(lambda x: x - 2.0, 0.0, 5.0, CFG) - 2.0) <= 1e-10

    def test_positive_branch_match(self):
        tau = find_root(lambda t: Phi(t) - Phi(t - 1) - 0.3245, -6.0, 0.5, CFG)
        assert abs(tau - (-0.1)) < 5e-3
        # frozen from bisection on the erfc oracle
        assert abs(tau - (-0.10003406838603518)) < 1e-8

    def test_negative_branch_match(self):
        tau = find_root(lambda t: Phi(t - 1) - Phi(t) + 0.0726, -6.0, 0.5, CFG)
        assert abs(tau - (-1.3996790409176023)) < 1e-8

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1.0, -1.0, 1.0, CFG)

    def test_endpoint_root(self):
        assert find_root(lambda x: x, 0.0, 1.0, CFG) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(
        slope=st.floats(0.01, 100.0) | st.floats(-100.0, -0.01),
        root=st.floats(-50.0, 50.0),
    )
    def test_affine_residual(self, slope, root):
        fn = lambda x: slope * (x - root)
        x = find_root(fn, -100.0, 100.0, CFG)
        assert abs(fn(x)) <= CFG.root_tol or abs(x - root) <= CFG.root_tol

    @settings(max_examples=100, deadline=None)
    @given(a=st.floats(0.01, 5.0), b=st.floats(0.0, 5.0), root=st.floats(-3.0, 3.0))
    def test_monotone_cubic_residual(self, a, b, root):
        fn = lambda x: a * (x - root) ** 3 + b * (x - root)
        x = find_root(fn, -10.0, 10.0, CFG)
        assert abs(fn(x)) <= CFG.root_tol or abs(x - root) <= CFG.root_tol


class TestMaximize:
    def test_quadratic(self):
        x, v = maximize_1d(lambda x: -(x - 1.0) ** 2, -5.0, 5.0, CFG)
        assert abs(x - 1.0) <= 1e-6 and abs(v) <= 1e-6

    def test_boundary_maximum(self):
        x, v = maximize_1d(lambda x: x, 0.0, 1.0, CFG)
        assert x == 1.0 and v == 1.0

    def test_global_over_local(self):
        fn = lambda x: math.exp(-(x + 2) ** 2) + 1.5 * math.exp(-((x - 3) ** 2) / 0.1)
        x, v = maximize_1d(fn, -6.0, 6.0, CFG)
        assert abs(x - 3.0) < 1e-4

    def test_plateau_reports_smallest(self):
        x, v = maximize_1d(lambda x: min(0.0, x - 1.0), -2.0, 4.0,
                           NumericsConfig(opt_grid_n=61))
        assert v == 0.0 and abs(x - 1.0) < 0.11

    def test_bad_interval(self):
        with pytest.raises(ParameterError):
            maximize_1d(lambda x: x, 1.0, 1.0, CFG)

    def test_golden_section(self):
        x, _ = golden_section_max(lambda x: -abs(x - 0.3), 0.0, 1.0, 1e-10)
        assert abs(x - 0.3) < 1e-9

    @settings(max_examples=50, deadline=None)
    @given(c=st.floats(-4.0, 4.0), a=st.floats(0.5, 20.0), kind=st.sampled_from(["quad", "cosh", "logsum"]))
    def test_concave_argmax(self, c, a, kind):
        fns = {
            "quad": lambda x: -a * (x - c) ** 2,
            "cosh": lambda x: -math.cosh(a * (x - c) / 4),
            "logsum": lambda x: -math.log(math.exp(a * (x - c)) + math.exp(-a * (x - c))),
        }
        x, _ = maximize_1d(fns[kind], -5.0, 5.0, NumericsConfig(opt_grid_n=201))
        assert abs(x - c) <= 1e-6


class TestNumericsConfig:
    @pytest.mark.parametrize("kwargs", [
        {"quad_tol": 0.0}, {"root_tol": -1e-3}, {"opt_grid_n": 2}, {"tail_mass": 0.6},
        {"opt_grid_n": 10.5}, {"quad_tol": math.nan},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ParameterError):
            NumericsConfig(**kwargs)

    def test_defaults(self):
        cfg = NumericsConfig()
        assert (cfg.quad_tol, cfg.root_tol, cfg.opt_grid_n, cfg.tail_mass) == (1e-9, 1e-10, 2001, 1e-10)
