"""Comparison-ODE machinery for the diameter estimates.

Along a unit-speed geodesic the function ``u = exp(-f/m)`` obeys

    u'' + (lambda - Ric(g', g')) / m * u = 0,

and the diameter bounds come from comparing ``u`` with ``cos(sqrt(K) s)``
(``K = (lambda - c)/m``) and ``cosh(sqrt(H) s)`` (``H = (C - lambda)/m``).
Everything here works on sampled profiles; the Ricci samples are treated as
piecewise linear in arclength.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ParameterError, ProfileError

DEFAULT_TOL = 1e-7

PASS, FAIL, SKIPPED, VIOLATED = "pass", "fail", "skipped", "hypothesis-violated"


@dataclass
class GeodesicProfile:
    """Arclength samples of ``Ric(g', g')`` and optionally ``f`` along a curve."""

    s: np.ndarray
    ric: np.ndarray
    f: Optional[np.ndarray] = None

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.ric = np.asarray(self.ric, dtype=float)
        if self.f is not None:
            self.f = np.asarray(self.f, dtype=float)
        if self.s.ndim != 1 or len(self.s) < 2:
            raise ProfileError("profile needs at least two arclength samples")
        if self.ric.shape != self.s.shape or (self.f is not None and self.f.shape != self.s.shape):
            raise ProfileError("profile columns have different lengths")
        if abs(self.s[0]) > 1e-12:
            raise ProfileError(f"profile must start at s = 0, got s[0] = {self.s[0]!r}")
        bad = np.nonzero(np.diff(self.s) <= 0)[0]
        if bad.size:
            raise ProfileError(f"arclength not strictly increasing at sample {bad[0] + 1}")

    @property
    def L(self) -> float:
        return float(self.s[-1])

    def ric_at(self, s) -> np.ndarray:
        return np.interp(s, self.s, self.ric)


@dataclass
class USolution:
    s: np.ndarray
    u: np.ndarray
    du: np.ndarray
    m: float
    lam: float
    profile: GeodesicProfile = field(repr=False)


def integrate_u(profile: GeodesicProfile, m: float, lam: float, u0: float = 1.0, refine: int = 10) -> USolution:
    """Solve ``u'' + (lam - ric)/m u = 0`` with ``u(0) = u0``, ``u'(0) = 0``.

    Classical RK4 on a grid ``refine`` times finer than the profile samples.
    """
    if m <= 0:
        raise ParameterError(f"m must be positive, got {m}")
    if u0 <= 0:
        raise ParameterError("u0 must be positive")
    if refine < 1:
        raise ParameterError("refine must be >= 1")
    s = profile.s

    def accel(si, ui):
        return -(lam - profile.ric_at(si)) / m * ui

    u = np.empty_like(s)
    du = np.empty_like(s)
    y, dy = u0, 0.0
    u[0], du[0] = y, dy
    for i in range(len(s) - 1):
        h = (s[i + 1] - s[i]) / refine
        t = s[i]
        for _ in range(refine):
            k1y, k1v = dy, accel(t, y)
            k2y, k2v = dy + 0.5 * h * k1v, accel(t + 0.5 * h, y + 0.5 * h * k1y)
            k3y, k3v = dy + 0.5 * h * k2v, accel(t + 0.5 * h, y + 0.5 * h * k2y)
            k4y, k4v = dy + h * k3v, accel(t + h, y + h * k3y)
            y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
            dy += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            t += h
        u[i + 1], du[i + 1] = y, dy
    return USolution(s=s.copy(), u=u, du=du, m=m, lam=lam, profile=profile)


@dataclass
class EnvelopeResult:
    status: str
    margin: float
    end_margin: float
    rate: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS


def _ric_outside(profile: GeodesicProfile, lo: float = -math.inf, hi: float = math.inf, tol: float = 1e-12) -> bool:
    return bool(np.any(profile.ric < lo - tol) or np.any(profile.ric > hi + tol))


def cosine_envelope_check(sol: USolution, K: float, c: Optional[float] = None, tol: float = DEFAULT_TOL) -> EnvelopeResult:
    """Check ``u(s) >= u(0) cos(sqrt(K) s)`` on the sampled arclengths.

    Only meaningful while ``L < pi / (2 sqrt(K))``; longer profiles are skipped.
    When ``c`` is given, a profile with ``ric < c`` somewhere is reported as a
    hypothesis violation rather than a failure.
    """
    if K <= 0:
        raise ParameterError(f"K must be positive, got {K}")
    L = sol.s[-1]
    limit = math.pi / (2.0 * math.sqrt(K))
    if L >= limit:
        return EnvelopeResult(SKIPPED, math.nan, math.nan, K, f"L = {L:.6g} >= pi/(2 sqrt K) = {limit:.6g}")
    diff = sol.u - sol.u[0] * np.cos(math.sqrt(K) * sol.s)
    margin, end = float(diff.min()), float(diff[-1])
    if c is not None and _ric_outside(sol.profile, lo=c):
        return EnvelopeResult(VIOLATED, margin, end, K, "Ric(g', g') < c somewhere on the profile")
    return EnvelopeResult(PASS if margin >= -tol else FAIL, margin, end, K)


def cosh_envelope_check(sol: USolution, H: float, C: Optional[float] = None, tol: float = DEFAULT_TOL) -> EnvelopeResult:
    """Check ``u(s) <= u(0) cosh(sqrt(H) s)`` on the sampled arclengths."""
    if H <= 0:
        raise ParameterError(f"H must be positive, got {H}")
    diff = sol.u[0] * np.cosh(math.sqrt(H) * sol.s) - sol.u
    margin, end = float(diff.min()), float(diff[-1])
    if C is not None and _ric_outside(sol.profile, hi=C):
        return EnvelopeResult(VIOLATED, margin, end, H, "Ric(g', g') > C somewhere on the profile")
    return EnvelopeResult(PASS if margin >= -tol else FAIL, margin, end, H)


@dataclass
class WronskianResult:
    passed: bool
    min_increment: float
    wronskian: np.ndarray


def wronskian_monotonicity(s, u, v, du=None, dv=None, tol: float = DEFAULT_TOL) -> WronskianResult:
    """Check that ``v^2 (u/v)' = u' v - u v'`` is non-decreasing on the grid.

    Derivatives default to second-order finite differences of the samples.
    """
    s, u, v = (np.asarray(a, dtype=float) for a in (s, u, v))
    if np.any(v <= 0):
        raise ParameterError("comparison function v must stay positive on the grid")
    du = np.gradient(u, s, edge_order=2) if du is None else np.asarray(du, dtype=float)
    dv = np.gradient(v, s, edge_order=2) if dv is None else np.asarray(dv, dtype=float)
    w = du * v - u * dv
    inc = np.diff(w)
    min_inc = float(inc.min()) if inc.size else 0.0
    return WronskianResult(min_inc >= -tol, min_inc, w)


@dataclass
class MidpointResult:
    status: str
    half1: tuple[float, float]
    half2: tuple[float, float]
    product: tuple[float, float]
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS


def _endpoint_slopes(s: np.ndarray, f: np.ndarray) -> tuple[float, float]:
    h0, h1 = s[1] - s[0], s[-1] - s[-2]
    start = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h0)
    end = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h1)
    return float(start), float(end)


def midpoint_split_check(profile: GeodesicProfile, m: float, lam: float, c: float, C: float,
                         tol: float = DEFAULT_TOL, check_endpoints: bool = True,
                         slope_tol: float = 1e-4) -> MidpointResult:
    """Verify the two half-geodesic inequalities at ``s = L/2`` and their product.

    The profile must run from a minimum point ``p`` of ``f`` (``s = 0``) to a
    maximum point ``q`` (``s = L``)::

        exp((f(x) - f(p))/m) <= sec(sqrt((lam - c)/m) L/2)
        exp((f(q) - f(x))/m) <= cosh(sqrt((C - lam)/m) L/2)
    """
    if profile.f is None:
        raise ProfileError("midpoint split check needs f samples")
    if m <= 0 or not c < lam < C:
        raise ParameterError("need m > 0 and c < lambda < C")
    s, fv = profile.s, profile.f
    L = profile.L
    a, b = math.sqrt((lam - c) / m), math.sqrt((C - lam) / m)
    if a * L / 2 >= math.pi / 2:
        raise ParameterError(f"L/2 = {L / 2:.6g} violates L/2 < (pi/2) sqrt(m/(lambda - c))")
    note = ""
    if check_endpoints and len(s) >= 3:
        start, end = _endpoint_slopes(s, fv)
        if abs(start) > slope_tol or abs(end) > slope_tol:
            note = f"f' at endpoints = ({start:.3g}, {end:.3g}); endpoints are not critical points"
    hit = np.nonzero(np.abs(s - L / 2) <= 1e-12 * max(1.0, L))[0]
    f_mid = float(fv[hit[0]]) if hit.size else float(CubicSpline(s, fv)(L / 2))
    sec = 1.0 / math.cos(a * L / 2)
    cosh = math.cosh(b * L / 2)
    half1 = (math.exp((f_mid - fv[0]) / m), sec)
    half2 = (math.exp((fv[-1] - f_mid) / m), cosh)
    product = (math.exp((fv[-1] - fv[0]) / m), sec * cosh)
    if note or _ric_outside(profile, c, C):
        return MidpointResult(VIOLATED, half1, half2, product, note or "Ric(g', g') leaves [c, C]")
    ok = all(lhs <= rhs * (1 + tol) + tol for lhs, rhs in (half1, half2, product))
    return MidpointResult(PASS if ok else FAIL, half1, half2, product)


def potential_from_u(sol: USolution) -> np.ndarray:
    """Manufactured potential ``f = -m log u`` along the profile."""
    if np.any(sol.u <= 0):
        raise ParameterError("u must stay positive to define f = -m log u")
    return -sol.m * np.log(sol.u)


def potential_equation_residual(s, f, ric, m: float, lam: float) -> np.ndarray:
    """``f'' - f'^2/m - (lam - ric)`` at interior nodes, by finite differences."""
    s, f, ric = (np.asarray(a, dtype=float) for a in (s, f, ric))
    df = np.gradient(f, s, edge_order=2)
    d2f = np.gradient(df, s, edge_order=2)
    return (d2f - df**2 / m - (lam - ric))[2:-2]


def synthetic_profile(kind: str, length: float, samples: int, c: float, C: float, lam: float = 0.0,
                      value: Optional[float] = None, cycles: float = 2.0) -> GeodesicProfile:
    """Desk-scale Ricci profiles.

    ``constant`` uses ``value``; ``linear`` ramps from ``c`` to ``C``;
    ``oscillating`` swings between ``c`` and ``C``.
    """
    s = np.linspace(0.0, length, samples)
    if kind == "constant":
        ric = np.full_like(s, lam if value is None else value)
    elif kind == "linear":
        ric = c + (C - c) * s / length
    elif kind == "oscillating":
        ric = 0.5 * (c + C) + 0.5 * (C - c) * np.sin(2 * math.pi * cycles * s / length)
    else:
        raise ParameterError(f"unknown synthetic profile kind {kind!r}")
    return GeodesicProfile(s=s, ric=ric)


def random_admissible_profile(rng: np.random.Generator, length: float, c: float, C: float,
                              samples: int = 201, knots: int = 8) -> GeodesicProfile:
    """Piecewise-linear random Ricci profile with values in ``[c, C]``."""
    knot_s = np.linspace(0.0, length, knots)
    knot_r = c + (C - c) * rng.random(knots)
    s = np.linspace(0.0, length, samples)
    return GeodesicProfile(s=s, ric=np.interp(s, knot_s, knot_r))


PROFILE_COLUMNS = ("s", "ric", "f")


def read_profile_csv(path) -> GeodesicProfile:
    """Load a profile from CSV with header ``s,ric`` or ``s,ric,f``; ``#`` starts a comment line."""
    path = Path(path)
    header = None
    rows: list[tuple[int, list[float]]] = []
    with path.open(newline="") as fh:
        for lineno, raw in enumerate(csv.reader(fh), start=1):
            if not raw or raw[0].lstrip().startswith("#"):
                continue
            cells = [cell.strip() for cell in raw]
            if header is None:
                if tuple(cells) not in (PROFILE_COLUMNS[:2], PROFILE_COLUMNS):
                    raise ProfileError(f"{path}:{lineno}: header must be 's,ric' or 's,ric,f', got {','.join(cells)!r}")
                header = cells
                continue
            if len(cells) != len(header):
                raise ProfileError(f"{path}:{lineno}: expected {len(header)} columns, got {len(cells)}")
            try:
                rows.append((lineno, [float(cell) for cell in cells]))
            except ValueError as exc:
                raise ProfileError(f"{path}:{lineno}: {exc}") from None
    if header is None or len(rows) < 2:
        raise ProfileError(f"{path}: need a header and at least two data rows")
    data = np.array([r for _, r in rows])
    for (prev_line, prev), (line, cur) in zip(rows, rows[1:]):
        if cur[0] <= prev[0]:
            raise ProfileError(f"{path}:{line}: s = {cur[0]!r} does not increase (previous row {prev_line} has s = {prev[0]!r})")
    if data[0, 0] != 0.0:
        raise ProfileError(f"{path}:{rows[0][0]}: first sample must have s = 0")
    return GeodesicProfile(s=data[:, 0], ric=data[:, 1], f=data[:, 2] if len(header) == 3 else None)


def write_profile_csv(profile: GeodesicProfile, path) -> None:
    cols = [profile.s, profile.ric] + ([profile.f] if profile.f is not None else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PROFILE_COLUMNS[: len(cols)])
        for row in zip(*cols):
            writer.writerow([repr(float(v)) for v in row])
