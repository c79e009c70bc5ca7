"""Closed-form estimates for compact m-quasi-Einstein four-manifolds.

``m = math.inf`` selects the gradient Ricci soliton limit; every function
then evaluates the analytic limit instead of the finite-m formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ParameterError

LOG5 = math.log(5.0)


def _require_m_gt_1(m: float) -> None:
    if not m > 1:
        raise ParameterError(
            f"m must be > 1, got {m!r} (at m = 1 the radicand 5 + 8/m - 12/m^2 equals 1 and every threshold collapses)"
        )


def log_radicand(m: float) -> float:
    """``log(5 + 8/m - 12/m^2)``; ``log 5`` at ``m = inf``."""
    _require_m_gt_1(m)
    if math.isinf(m):
        return LOG5
    return math.log(5.0 + 8.0 / m - 12.0 / m**2)


def log_d_m(m: float) -> float:
    """``log D_m = log(5 + 8/m - 12/m^2) / (m + 2)``; 0 in the soliton limit."""
    return 0.0 if math.isinf(m) else log_radicand(m) / (m + 2.0)


def d_m(m: float) -> float:
    """``D_m``, the (m+2)-th root of ``5 + 8/m - 12/m^2``."""
    return math.exp(log_d_m(m))


def osc_bound(m: float) -> float:
    """Largest potential oscillation for which the Euler-characteristic estimate forces Hitchin-Thorpe."""
    if math.isinf(m):
        _require_m_gt_1(m)
        return LOG5
    return m / (m + 2.0) * log_radicand(m)


def arccos_exp_neg(x: float) -> float:
    """``arccos(exp(-x))`` for ``x >= 0`` without cancellation near ``x = 0``."""
    return 2.0 * math.asin(math.sqrt(-math.expm1(-x) / 2.0))


def arccosh_exp(x: float) -> float:
    """``arccosh(exp(x))`` for ``x >= 0`` without cancellation near ``x = 0``."""
    delta = math.expm1(x)
    return math.log1p(delta + math.sqrt(delta * (delta + 2.0)))


def log_cosh(y: float) -> float:
    return math.log1p(2.0 * math.sinh(y / 2.0) ** 2) if abs(y) < 20 else abs(y) - math.log(2.0) + math.log1p(math.exp(-2 * abs(y)))


def log_cos(y: float) -> float:
    return math.log1p(-2.0 * math.sin(y / 2.0) ** 2)


@dataclass(frozen=True)
class BoundsInput:
    """Scalar data feeding the closed-form estimates.

    ``c``/``C`` are the minimum/maximum of ``Ric(v, v)`` over unit vectors,
    ``d`` the diameter, ``vol`` the volume and ``w2_integral`` the integral of
    ``|W|^2``.  For a non-constant potential (``f_osc > 0``) the ordering
    ``c < lam < C`` is enforced.
    """

    m: float
    lam: float
    c: Optional[float] = None
    C: Optional[float] = None
    f_osc: float = 0.0
    d: Optional[float] = None
    vol: Optional[float] = None
    w2_integral: float = 0.0
    chi: Optional[float] = None
    tau: Optional[float] = None

    def __post_init__(self):
        if not self.m > 0:
            raise ParameterError(f"m must be positive, got {self.m!r}")
        if not self.lam > 0:
            raise ParameterError(f"lambda must be positive for a compact quasi-Einstein manifold, got {self.lam!r}")
        if self.f_osc < 0:
            raise ParameterError("f_osc must be >= 0")
        if self.d is not None and self.d < 0:
            raise ParameterError("diameter must be >= 0")
        if self.vol is not None and not self.vol > 0:
            raise ParameterError("volume must be positive")
        if self.w2_integral < 0:
            raise ParameterError("the integral of |W|^2 must be >= 0")
        if self.f_osc > 0:
            if self.c is not None and not self.c < self.lam:
                raise ParameterError(
                    f"non-constant potential requires c < lambda (got c = {self.c}, lambda = {self.lam}); "
                    "a non-trivial structure always has c < lambda < C")
            if self.C is not None and not self.lam < self.C:
                raise ParameterError(
                    f"non-constant potential requires lambda < C (got lambda = {self.lam}, C = {self.C}); "
                    "a non-trivial structure always has c < lambda < C")

    @property
    def soliton(self) -> bool:
        return math.isinf(self.m)

    def _need(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise ParameterError(f"this estimate needs {name!r}")
        return value

    @property
    def K(self) -> float:
        """``(lambda - c)/m``; meaningful (and positive) only for finite m."""
        k = (self.lam - self._need("c")) / self.m
        if not k > 0 and not self.soliton:
            raise ParameterError(f"K = (lambda - c)/m must be positive, got {k}")
        return k

    @property
    def H(self) -> float:
        h = (self._need("C") - self.lam) / self.m
        if not h > 0 and not self.soliton:
            raise ParameterError(f"H = (C - lambda)/m must be positive, got {h}")
        return h

    def gap_low(self) -> float:
        gap = self.lam - self._need("c")
        if gap <= 0:
            raise ParameterError(f"need c < lambda, got c = {self.c}, lambda = {self.lam}")
        return gap

    def gap_high(self) -> float:
        gap = self._need("C") - self.lam
        if gap <= 0:
            raise ParameterError(f"need lambda < C, got lambda = {self.lam}, C = {self.C}")
        return gap


def diam_lower_cos(inp: BoundsInput) -> float:
    """``sqrt(m/(lambda - c)) arccos(exp(-f_osc/m))``; 0 for constant potential."""
    if inp.f_osc == 0:
        return 0.0
    gap = inp.gap_low()
    if inp.soliton:
        return math.sqrt(2.0 * inp.f_osc / gap)
    return math.sqrt(inp.m / gap) * arccos_exp_neg(inp.f_osc / inp.m)


def diam_lower_cosh(inp: BoundsInput) -> float:
    """``sqrt(m/(C - lambda)) arccosh(exp(f_osc/m))``; 0 for constant potential."""
    if inp.f_osc == 0:
        return 0.0
    gap = inp.gap_high()
    if inp.soliton:
        return math.sqrt(2.0 * inp.f_osc / gap)
    return math.sqrt(inp.m / gap) * arccosh_exp(inp.f_osc / inp.m)


def _mixed_args(inp: BoundsInput) -> tuple[float, float, float]:
    d = inp._need("d")
    a = math.sqrt(inp.gap_low() / inp.m)
    b = math.sqrt(inp.gap_high() / inp.m)
    if a * d >= math.pi:
        raise ParameterError(
            f"mixed estimate needs d < pi sqrt(m/(lambda - c)) = {math.pi / a:.12g}, got d = {d!r}")
    return a, b, d


def mixed_osc_bound(inp: BoundsInput) -> float:
    """Upper bound for ``exp(f_osc/m)``: ``cosh(sqrt(H) d/2) sec(sqrt(K) d/2)``."""
    if inp.soliton:
        inp._need("d")
        return 1.0
    a, b, d = _mixed_args(inp)
    return math.cosh(b * d / 2.0) / math.cos(a * d / 2.0)


def mixed_osc_exponent_bound(inp: BoundsInput) -> float:
    """The same estimate as a bound on ``f_osc`` itself: ``m log(cosh(...) sec(...))``.

    In the soliton limit this is ``(C - c) d^2 / 8``.
    """
    if inp.soliton:
        return (inp._need("C") - inp._need("c")) * inp._need("d") ** 2 / 8.0
    a, b, d = _mixed_args(inp)
    return inp.m * (log_cosh(b * d / 2.0) - log_cos(a * d / 2.0))


@dataclass(frozen=True)
class HTThresholds:
    t1: float
    t2: float
    t3: float
    x0: float
    root_residual: float
    iterations: int

    def as_tuple(self) -> tuple[float, float, float]:
        return self.t1, self.t2, self.t3


def mixed_profile(x, a: float, b: float):
    """``H(x) = cosh(b x) sec(a x)``."""
    return np.cosh(b * np.asarray(x)) / np.cos(a * np.asarray(x))


def solve_x0(a: float, b: float, log_target: float, xtol: float = 1e-12, max_iter: int = 200) -> tuple[float, int]:
    """Bisection for ``log cosh(b x) - log cos(a x) = log_target`` on ``(0, pi/(2a))``.

    The left side is strictly increasing on that interval, 0 at ``x = 0`` and
    unbounded at the secant pole, so the root is unique and interior.
    """
    if log_target <= 0:
        raise ParameterError("target must exceed 1")

    def gap(x):
        return log_cosh(b * x) - log_cos(a * x) - log_target

    pole = math.pi / (2.0 * a)
    lo, hi = 0.0, 0.999999 * pole
    shrink = 1e-6
    while gap(hi) <= 0:
        shrink *= 1e-2
        if shrink < 1e-15:
            raise ParameterError("could not bracket the root below the secant pole")
        hi = (1.0 - shrink) * pole
    iterations = 0
    while iterations < max_iter and hi - lo > xtol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if gap(mid) > 0:
            hi = mid
        else:
            lo = mid
        iterations += 1
    return 0.5 * (lo + hi), iterations


def ht_thresholds(inp: BoundsInput) -> HTThresholds:
    """The three diameter thresholds below which Hitchin-Thorpe is guaranteed."""
    _require_m_gt_1(inp.m)
    low, high = inp.gap_low(), inp.gap_high()
    if inp.soliton:
        t1 = math.sqrt(2.0 * LOG5 / low)
        t2 = math.sqrt(2.0 * LOG5 / high)
        x0 = math.sqrt(2.0 * LOG5 / (inp.C - inp.c))
        return HTThresholds(t1, t2, 2.0 * x0, x0, 0.0, 0)
    m = inp.m
    ld = log_d_m(m)
    t1 = math.sqrt(m / low) * arccos_exp_neg(ld)
    t2 = math.sqrt(m / high) * arccosh_exp(ld)
    a, b = math.sqrt(low / m), math.sqrt(high / m)
    x0, iterations = solve_x0(a, b, ld)
    residual = float(mixed_profile(x0, a, b)) - d_m(m)
    return HTThresholds(t1, t2, 2.0 * x0, x0, residual, iterations)


def mixed_profile_monotone(inp: BoundsInput, samples: int = 2001) -> bool:
    """Sampled check that ``H`` is strictly increasing on ``(0, pi/2 sqrt(m/(lambda - c)))``."""
    a = math.sqrt(inp.gap_low() / inp.m)
    b = math.sqrt(inp.gap_high() / inp.m)
    x = np.linspace(0.0, 0.999 * math.pi / (2 * a), samples)
    return bool(np.all(np.diff(mixed_profile(x, a, b)) > 0))


def soliton_limits(lam: float, c: float, C: float) -> dict:
    """The three soliton-limit diameter thresholds and the oscillation limit ``log 5``."""
    return {
        "osc_bound": LOG5,
        "t1": math.sqrt(2.0 * LOG5 / (lam - c)),
        "t2": math.sqrt(2.0 * LOG5 / (C - lam)),
        "t3": 2.0 * math.sqrt(2.0 * LOG5 / (C - c)),
    }


def volume_parenthesis(m: float, f_osc: float) -> float:
    """``5 + 8/m - 12/m^2 - exp(f_osc (m+2)/m)``; ``5 - exp(f_osc)`` at ``m = inf``."""
    _require_m_gt_1(m)
    if math.isinf(m):
        return 5.0 - math.exp(f_osc)
    return 5.0 + 8.0 / m - 12.0 / m**2 - math.exp(f_osc * (m + 2.0) / m)


def _volume_coefficient(m: float) -> float:
    # m^2 / ((m-1)(m+3)) -> 1 as m -> inf
    return 1.0 if math.isinf(m) else m**2 / ((m - 1.0) * (m + 3.0))


@dataclass(frozen=True)
class DefectBound:
    value: float
    parenthesis: float
    below_threshold: bool


def ht_defect_lower(inp: BoundsInput) -> DefectBound:
    """Lower bound for ``8 pi^2 chi``: ``int|W|^2 + m^2 lam^2/(6(m-1)(m+3)) vol (...)``."""
    paren = volume_parenthesis(inp.m, inp.f_osc)
    vol = inp._need("vol")
    value = inp.w2_integral + _volume_coefficient(inp.m) * inp.lam**2 / 6.0 * vol * paren
    return DefectBound(value, paren, paren < 0)


@dataclass(frozen=True)
class VolumeBound:
    max_vol: Optional[float]
    parenthesis: float

    @property
    def unconstrained(self) -> bool:
        return self.max_vol is None


def volume_bound(inp: BoundsInput) -> VolumeBound:
    """Upper bound on the volume; unconstrained when the parenthesis is not positive."""
    paren = volume_parenthesis(inp.m, inp.f_osc)
    if paren <= 0:
        return VolumeBound(None, paren)
    return VolumeBound(96.0 * math.pi**2 / (inp.lam**2 * _volume_coefficient(inp.m) * paren), paren)


@dataclass(frozen=True)
class YamabeBound:
    value: float

    @property
    def vacuous(self) -> bool:
        return self.value <= 0


def yamabe_bound(inp: BoundsInput) -> YamabeBound:
    """Lower bound for the squared Yamabe invariant."""
    paren = volume_parenthesis(inp.m, inp.f_osc)
    return YamabeBound(4.0 * _volume_coefficient(inp.m) * inp.lam**2 * paren * inp._need("vol"))


@dataclass(frozen=True)
class ScalarIntegralResult:
    passed: bool
    lhs: float
    threshold: float


def scalar_integral_factor(m: float) -> float:
    """``24(m+1)/(m+2)``, tending to 24 in the soliton limit."""
    _require_m_gt_1(m)
    return 24.0 if math.isinf(m) else 24.0 * (m + 1.0) / (m + 2.0)


def scalar_integral_criterion(r2_integral: float, inp: BoundsInput, rtol: float = 1e-9) -> ScalarIntegralResult:
    """Integral criterion ``int R^2 <= 24(m+1)/(m+2) lam^2 vol``."""
    threshold = scalar_integral_factor(inp.m) * inp.lam**2 * inp._need("vol")
    return ScalarIntegralResult(r2_integral <= threshold * (1 + rtol), r2_integral, threshold)
