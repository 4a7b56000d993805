"""Scalar distributions and the numerical kernels used across the package.

Everything here is a pure function of its inputs. Closed-form CDFs and
quantiles come from :mod:`scipy.special`; quadrature, root finding and
1-d maximization are small self-contained routines so their tolerances are
fully under our control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special

from .errors import BracketError, NumericsError, ParameterError

KINDS = ("gaussian", "logistic", "uniform")
FULL_SUPPORT_KINDS = ("gaussian", "logistic")

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NumericsConfig:
    """Tolerances and grid sizes for the numerical kernels.

    ``grid_tail`` is the per-tail probability mass excluded from the scan
    span used by the threshold optimizers.
    """

    quad_tol: float = 1e-9
    root_tol: float = 1e-10
    opt_grid_n: int = 2001
    tail_mass: float = 1e-10
    grid_tail: float = 1e-6

    def __post_init__(self):
        for name in ("quad_tol", "root_tol", "tail_mass", "grid_tail"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
        if self.tail_mass >= 0.5 or self.grid_tail >= 0.5:
            raise ParameterError("tail masses must be below 0.5")
        if not isinstance(self.opt_grid_n, int) or isinstance(self.opt_grid_n, bool) or self.opt_grid_n < 3:
            raise ParameterError(f"opt_grid_n must be an integer >= 3, got {self.opt_grid_n!r}")


DEFAULT_NUMERICS = NumericsConfig()


@dataclass(frozen=True)
class ContinuousDist:
    """A gaussian, logistic or uniform law on the real line.

    For gaussian and logistic ``loc``/``scale`` are the location and scale
    (standard deviation for gaussian). For uniform the support is ``[a, b]``.
    Methods accept floats or numpy arrays.
    """

    kind: str
    loc: float = 0.0
    scale: float = 1.0
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown distribution kind {self.kind!r}; expected one of {KINDS}")
        for name in ("loc", "scale", "a", "b"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.kind == "uniform":
            if not self.a < self.b:
                raise ParameterError(f"uniform requires a < b, got a={self.a}, b={self.b}")
        elif self.scale <= 0:
            raise ParameterError(f"scale must be positive, got {self.scale}")

    @property
    def full_support(self) -> bool:
        return self.kind in FULL_SUPPORT_KINDS

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.loc) / self.scale

    def logpdf(self, x):
        if self.kind == "gaussian":
            z = self._z(x)
            return -0.5 * z * z - _LOG_SQRT_2PI - math.log(self.scale)
        if self.kind == "logistic":
            az = np.abs(self._z(x))
            return -az - 2.0 * np.log1p(np.exp(-az)) - math.log(self.scale)
        x = np.asarray(x, dtype=float)
        inside = (x >= self.a) & (x <= self.b)
        with np.errstate(divide="ignore"):
            return np.where(inside, -math.log(self.b - self.a), -np.inf)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        if self.kind == "gaussian":
            return special.ndtr(self._z(x))
        if self.kind == "logistic":
            return special.expit(self._z(x))
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)

    def sf(self, x):
        """Upper tail ``1 - cdf(x)``, computed without cancellation."""
        if self.kind == "gaussian":
            return special.ndtr(-self._z(x))
        if self.kind == "logistic":
            return special.expit(-self._z(x))
        x = np.asarray(x, dtype=float)
        return np.clip((self.b - x) / (self.b - self.a), 0.0, 1.0)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == "gaussian":
            return self.loc + self.scale * special.ndtri(p)
        if self.kind == "logistic":
            return self.loc + self.scale * special.logit(p)
        return self.a + p * (self.b - self.a)

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "gaussian":
            return rng.normal(self.loc, self.scale, size)
        if self.kind == "logistic":
            return rng.logistic(self.loc, self.scale, size)
        return rng.uniform(self.a, self.b, size)

    def to_dict(self) -> dict:
        if self.kind == "uniform":
            return {"kind": self.kind, "a": self.a, "b": self.b}
        return {"kind": self.kind, "loc": self.loc, "scale": self.scale}


def make_dist(kind: str, **params) -> ContinuousDist:
    """Build a distribution from a kind name and keyword parameters.

    >>> make_dist("gaussian", loc=0.75, scale=1.0).cdf(1.625) > 0.8
    True
    """
    allowed = {"a", "b"} if kind == "uniform" else {"loc", "scale"}
    extra = set(params) - allowed
    if extra:
        raise ParameterError(f"unexpected parameters for {kind}: {sorted(extra)}")
    try:
        values = {k: float(v) for k, v in params.items()}
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"non-numeric distribution parameter: {exc}") from None
    return ContinuousDist(kind, **values)


def span_of(dists: Iterable[ContinuousDist], mass: float) -> tuple[float, float]:
    """Smallest interval holding all but ``mass`` per tail of every law."""
    dists = list(dists)
    lo = min(float(d.quantile(mass)) for d in dists)
    hi = max(float(d.quantile(1.0 - mass)) for d in dists)
    return lo, hi


# ---------------------------------------------------------------------------
# quadrature

_MAX_DEPTH = 50
_INITIAL_PANELS = 16


def _simpson(fa, fm, fb, h):
    return h * (fa + 4.0 * fm + fb) / 6.0


def integrate(
    fn: Callable[[float], float],
    a: float,
    b: float,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
    dists: Sequence[ContinuousDist] = (),
) -> float:
    """Adaptive Simpson quadrature of ``fn`` over ``[a, b]``.

    Infinite endpoints are replaced by the ``cfg.tail_mass`` quantiles of
    ``dists`` (the laws whose densities make up the integrand), so at least
    one distribution must be supplied when an endpoint is infinite.
    """
    if math.isnan(a) or math.isnan(b):
        raise ParameterError("integration limits must not be NaN")
    if a > b:
        raise ParameterError(f"integrate requires a <= b, got [{a}, {b}]")
    if math.isinf(a) or math.isinf(b):
        if not dists:
            raise ParameterError("infinite limits need reference distributions for truncation")
        lo, hi = span_of(dists, cfg.tail_mass)
        if math.isinf(a):
            a = lo
        if math.isinf(b):
            b = hi
        if a >= b:
            return 0.0
    if a == b:
        return 0.0

    total = 0.0
    unconverged = None
    edges = np.linspace(a, b, _INITIAL_PANELS + 1)
    panel_tol = cfg.quad_tol / _INITIAL_PANELS
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = float(fn(lo)), float(fn(mid)), float(fn(hi))
        stack = [(lo, hi, flo, fmid, fhi, _simpson(flo, fmid, fhi, hi - lo), panel_tol, 0)]
        while stack:
            x0, x1, f0, fm, f1, whole, tol, depth = stack.pop()
            xm = 0.5 * (x0 + x1)
            fl = float(fn(0.5 * (x0 + xm)))
            fr = float(fn(0.5 * (xm + x1)))
            left = _simpson(f0, fl, fm, xm - x0)
            right = _simpson(fm, fr, f1, x1 - xm)
            delta = left + right - whole
            if abs(delta) <= 15.0 * tol or depth >= _MAX_DEPTH:
                if abs(delta) > 15.0 * tol and unconverged is None:
                    unconverged = xm
                total += left + right + delta / 15.0
            else:
                stack.append((x0, xm, f0, fl, fm, left, tol / 2.0, depth + 1))
                stack.append((xm, x1, fm, fr, f1, right, tol / 2.0, depth + 1))
    if unconverged is not None:
        raise NumericsError(f"adaptive Simpson did not converge near x={unconverged:.6g}", estimate=total)
    return total


# ---------------------------------------------------------------------------
# root finding


def find_root(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
) -> float:
    """Bisection on a sign-changing bracket.

    Returns ``x`` with ``|fn(x)| <= root_tol`` or inside a bracket of width
    at most ``root_tol``.
    """
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = float(fn(lo)), float(fn(hi))
    if abs(flo) <= cfg.root_tol and abs(flo) <= abs(fhi):
        return lo
    if abs(fhi) <= cfg.root_tol:
        return hi
    if math.isnan(flo) or math.isnan(fhi) or (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo:.3g}, f(hi)={fhi:.3g}")
    for _ in range(400):
        if hi - lo <= cfg.root_tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = float(fn(mid))
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return lo if abs(flo) <= abs(fhi) else hi


# ---------------------------------------------------------------------------
# maximization

# local maxima refined per scan; more than this on one curve means rounding noise
_MAX_REFINE = 8


def golden_section_max(fn, a, b, xtol):
    """Maximize a unimodal ``fn`` on ``[a, b]``; returns ``(x, fn(x))``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def _local_max_indices(y: np.ndarray) -> list[int]:
    n = len(y)
    out = []
    for i in range(n):
        left_ok = i == 0 or y[i] > y[i - 1]
        right_ok = i == n - 1 or y[i] >= y[i + 1]
        if left_ok and right_ok:
            out.append(i)
    return out


def maximize_1d(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
) -> tuple[float, float]:
    """Global maximum of ``fn`` on ``[lo, hi]``.

    Scans ``cfg.opt_grid_n`` equispaced points, then runs golden-section
    search inside the two-cell bracket of each local maximum (plateaus
    collapse to their left end). Among equal values the smallest ``x`` wins.
    """
    if not lo < hi:
        raise ParameterError(f"maximize_1d requires lo < hi, got [{lo}, {hi}]")
    xs = np.linspace(lo, hi, cfg.opt_grid_n)
    ys = np.array([float(fn(float(x))) for x in xs])
    if np.isnan(ys).any():
        raise NumericsError("objective returned NaN on the scan grid")

    candidates = _local_max_indices(ys)
    candidates = sorted(candidates, key=lambda i: (-ys[i], i))[:_MAX_REFINE]
    best_i = int(np.argmax(ys))
    best_x, best_y = float(xs[best_i]), float(ys[best_i])
    for i in sorted(candidates):
        a = float(xs[max(i - 1, 0)])
        b = float(xs[min(i + 1, len(xs) - 1)])
        x, y = golden_section_max(lambda t: float(fn(t)), a, b, cfg.root_tol)
        if y > best_y or (y == best_y and x < best_x):
            best_x, best_y = float(x), float(y)
    return best_x, best_y
