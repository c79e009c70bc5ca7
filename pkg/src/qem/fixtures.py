"""Analytic test manifolds with known invariants, and the profile import format.

Every chart supplies analytic first and second metric derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .bounds import osc_bound
from .errors import ParameterError, ProfileError
from .qe import QEData, constant_potential
from .quadrature import QuadratureSpec
from .tensor import MetricChart

KINDS = ("sphere4", "torus4", "s2xs2", "cp2-fubini-study", "perturbed-sphere4", "imported-profile")

DEFAULT_PARAMS = {
    "sphere4": {"r": 1.0, "m": 2.0},
    "torus4": {"side": 2 * math.pi, "m": 2.0},
    "s2xs2": {"r1": 1.0, "r2": 1.0, "m": 2.0},
    "cp2-fubini-study": {"m": 2.0},
    "perturbed-sphere4": {"eps": 0.01, "m": 2.0},
    "imported-profile": {"path": None},
}

EXPECTED_FAIL = "expected-fail"
NOT_COMPACT_QE = "lambda-zero"

# derivative step for analytic charts; only the R-field differences use it, and
# a larger step keeps rounding noise in second differences of R small
ANALYTIC_FD_STEP = 5e-3


@dataclass(frozen=True)
class FixtureSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown fixture kind {self.kind!r}; choose from {KINDS}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise ParameterError(f"unknown parameters for {self.kind}: {sorted(unknown)}")

    def resolved(self) -> dict:
        out = dict(DEFAULT_PARAMS[self.kind])
        out.update({k: v for k, v in self.params.items() if v is not None})
        return out


@dataclass(frozen=True)
class Expected:
    value: float
    note: str


@dataclass(frozen=True)
class Fixture:
    spec: FixtureSpec
    chart: MetricChart
    qe: Optional[QEData]
    expected: dict
    quad: QuadratureSpec
    sample_box: tuple
    flags: tuple = ()
    profile: Optional["ImportedProfile"] = None

    def value(self, name: str) -> Optional[float]:
        e = self.expected.get(name)
        return None if e is None else e.value


# conformally flat charts g = exp(ell) * identity

def _conformal_parts(ell, dell, d2ell, x):
    n = x.shape[1]
    w = np.exp(ell(x))
    dl = dell(x)
    d2l = d2ell(x)
    eye = np.eye(n)
    g = w[:, None, None] * eye
    dg = (w[:, None] * dl)[:, :, None, None] * eye
    d2 = w[:, None, None] * (d2l + np.einsum("nk,nl->nkl", dl, dl))
    d2g = d2[:, :, :, None, None] * eye
    return g, dg, d2g


def conformal_chart(ell, dell, d2ell, dim: int = 4, domain=None, label: str = "",
                    fd_step: Optional[float] = None) -> MetricChart:
    """Chart with metric ``exp(ell) * identity`` and analytic derivatives."""
    return MetricChart(
        g=lambda x: _conformal_parts(ell, dell, d2ell, x)[0],
        dg=lambda x: _conformal_parts(ell, dell, d2ell, x)[1],
        d2g=lambda x: _conformal_parts(ell, dell, d2ell, x)[2],
        dim=dim, domain=domain, label=label, fd_step=fd_step,
    )


def _stereo_ell(r: float):
    """Log conformal factor of the round sphere of radius ``r`` in stereographic coordinates."""
    log4r2 = math.log(4.0 * r * r)

    def ell(x):
        return log4r2 - 2.0 * np.log1p(np.sum(x * x, axis=-1))

    def dell(x):
        return -4.0 * x / (1.0 + np.sum(x * x, axis=-1))[:, None]

    def d2ell(x):
        q = 1.0 + np.sum(x * x, axis=-1)
        n = x.shape[1]
        return (-4.0 / q)[:, None, None] * np.eye(n) + (8.0 / q**2)[:, None, None] * np.einsum("nk,nl->nkl", x, x)

    return ell, dell, d2ell


def sphere_chart(r: float = 1.0, dim: int = 4) -> MetricChart:
    return conformal_chart(*_stereo_ell(r), dim=dim, label=f"sphere{dim}(r={r:g})", fd_step=ANALYTIC_FD_STEP)


def perturbed_sphere_chart(eps: float) -> MetricChart:
    """Unit round metric times ``exp(2 eps X1 X2)``, ``Xi = 2 xi/(1+|x|^2)``.

    ``X1 X2`` is a degree-2 spherical harmonic, so the metric fails the
    Einstein condition at first order in ``eps``.
    """
    ell0, dell0, d2ell0 = _stereo_ell(1.0)
    c = 8.0 * eps

    def parts(x):
        n = x.shape[1]
        q = 1.0 + np.sum(x * x, axis=-1)
        P = x[:, 0] * x[:, 1]
        dP = np.zeros_like(x)
        dP[:, 0], dP[:, 1] = x[:, 1], x[:, 0]
        d2P = np.zeros((n, n))
        d2P[0, 1] = d2P[1, 0] = 1.0
        # psi = c P q^-2
        psi = c * P / q**2
        dpsi = c * (dP / (q**2)[:, None] - 4.0 * (P / q**3)[:, None] * x)
        cross = np.einsum("nk,nl->nkl", dP, x)
        d2psi = c * (d2P / (q**2)[:, None, None]
                     - 4.0 * (cross + np.swapaxes(cross, 1, 2)) / (q**3)[:, None, None]
                     - 4.0 * (P / q**3)[:, None, None] * np.eye(n)
                     + 24.0 * (P / q**4)[:, None, None] * np.einsum("nk,nl->nkl", x, x))
        return psi, dpsi, d2psi

    return conformal_chart(
        lambda x: ell0(x) + parts(x)[0],
        lambda x: dell0(x) + parts(x)[1],
        lambda x: d2ell0(x) + parts(x)[2],
        label=f"perturbed-sphere4(eps={eps:g})",
        fd_step=ANALYTIC_FD_STEP,
    )


def flat_chart(side: float, dim: int = 4) -> MetricChart:
    def g(x):
        return np.broadcast_to(np.eye(dim), (x.shape[0], dim, dim)).copy()

    return MetricChart(
        g=g,
        dg=lambda x: np.zeros((x.shape[0],) + (dim,) * 3),
        d2g=lambda x: np.zeros((x.shape[0],) + (dim,) * 4),
        dim=dim, domain=tuple((0.0, side) for _ in range(dim)), label=f"torus{dim}(side={side:g})",
    )


def product_s2_chart(r1: float, r2: float) -> MetricChart:
    """``S^2(r1) x S^2(r2)`` with stereographic coordinates on each factor."""
    factors = [(slice(0, 2), _stereo_ell(r1)), (slice(2, 4), _stereo_ell(r2))]

    def parts(x):
        n = x.shape[0]
        g = np.zeros((n, 4, 4))
        dg = np.zeros((n, 4, 4, 4))
        d2g = np.zeros((n, 4, 4, 4, 4))
        for sl, fns in factors:
            gb, dgb, d2gb = _conformal_parts(*fns, x[:, sl])
            g[:, sl, sl] = gb
            dg[:, sl, sl, sl] = dgb
            d2g[:, sl, sl, sl, sl] = d2gb
        return g, dg, d2g

    return MetricChart(g=lambda x: parts(x)[0], dg=lambda x: parts(x)[1], d2g=lambda x: parts(x)[2],
                       label=f"s2xs2(r1={r1:g}, r2={r2:g})", fd_step=ANALYTIC_FD_STEP)


# Fubini-Study on the affine chart C^2 = R^4, coordinates (x1, y1, x2, y2)

_J = np.array([[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]])
_LS = (np.eye(4), _J)

# metric scale giving Ric = 6 g (holomorphic sectional curvature 4)
CP2_SCALE = 1.0


def _cp2_parts(x, c=CP2_SCALE):
    s = np.sum(x * x, axis=-1)
    q = 1.0 + s
    a, da, d2a = c / q, -c / q**2, 2.0 * c / q**3
    b, db, d2b = -c / q**2, 2.0 * c / q**3, -6.0 * c / q**4
    eye = np.eye(4)
    lx = [x @ L.T for L in _LS]  # (L x) per point
    Q = sum(np.einsum("ni,nj->nij", v, v) for v in lx)
    # dQ[n, k, i, j] = sum_L L_ik (Lx)_j + (Lx)_i L_jk
    dQ = sum(np.einsum("ik,nj->nkij", L, v) + np.einsum("ni,jk->nkij", v, L) for L, v in zip(_LS, lx))
    d2Q = sum(np.einsum("ik,jl->klij", L, L) + np.einsum("il,jk->klij", L, L) for L in _LS)
    g = a[:, None, None] * eye + b[:, None, None] * Q
    dg = (2.0 * (da[:, None] * x)[:, :, None, None] * eye
          + 2.0 * (db[:, None] * x)[:, :, None, None] * Q[:, None]
          + b[:, None, None, None] * dQ)
    xx = np.einsum("nk,nl->nkl", x, x)
    ca = 2.0 * da[:, None, None] * eye + 4.0 * d2a[:, None, None] * xx
    cb = 2.0 * db[:, None, None] * eye + 4.0 * d2b[:, None, None] * xx
    mixed = np.einsum("nk,nlij->nklij", x, dQ) + np.einsum("nl,nkij->nklij", x, dQ)
    d2g = (ca[:, :, :, None, None] * eye + cb[:, :, :, None, None] * Q[:, None, None]
           + 2.0 * db[:, None, None, None, None] * mixed + b[:, None, None, None, None] * d2Q)
    return g, dg, d2g


def cp2_chart() -> MetricChart:
    return MetricChart(g=lambda x: _cp2_parts(x)[0], dg=lambda x: _cp2_parts(x)[1],
                       d2g=lambda x: _cp2_parts(x)[2], label="cp2-fubini-study", fd_step=ANALYTIC_FD_STEP)


# cohomogeneity-one ansatz dt^2 + b^2 (dth^2 + sin^2 th dph^2) + a^2 (dps + cos th dph)^2

@dataclass(frozen=True)
class RadialFunction:
    """A function of ``t`` with its first two derivatives (vectorised)."""

    value: Callable
    d1: Callable
    d2: Callable

    @classmethod
    def spline(cls, t, y) -> "RadialFunction":
        sp = CubicSpline(t, y)
        return cls(sp, sp.derivative(1), sp.derivative(2))


def _squared(fn: RadialFunction, t):
    v, d1, d2 = fn.value(t), fn.d1(t), fn.d2(t)
    return v * v, 2.0 * v * d1, 2.0 * (d1 * d1 + v * d2)


def _cohom_parts(a: RadialFunction, b: RadialFunction, x):
    t, th = x[:, 0], x[:, 1]
    A, dA, d2A = _squared(a, t)
    B, dB, d2B = _squared(b, t)
    s, c = np.sin(th), np.cos(th)
    s2, c2 = s * s, c * c
    n = len(x)
    g = np.zeros((n, 4, 4))
    dg = np.zeros((n, 4, 4, 4))
    d2g = np.zeros((n, 4, 4, 4, 4))

    def put(arr, i, j, v):
        arr[..., i, j] = v
        arr[..., j, i] = v

    g[:, 0, 0] = 1.0
    for arr, (Ai, Bi) in ((g, (A, B)), (dg[:, 0], (dA, dB)), (d2g[:, 0, 0], (d2A, d2B))):
        arr[:, 1, 1] = Bi
        arr[:, 2, 2] = Bi * s2 + Ai * c2
        put(arr, 2, 3, Ai * c)
        arr[:, 3, 3] = Ai
    # theta derivatives
    dg[:, 1, 2, 2] = (B - A) * 2.0 * s * c
    put(dg[:, 1], 2, 3, -A * s)
    for arr in (d2g[:, 0, 1], d2g[:, 1, 0]):
        arr[:, 2, 2] = (dB - dA) * 2.0 * s * c
        put(arr, 2, 3, -dA * s)
    d2g[:, 1, 1, 2, 2] = (B - A) * 2.0 * (c2 - s2)
    put(d2g[:, 1, 1], 2, 3, -A * c)
    return g, dg, d2g


def cohomogeneity_one_chart(a: RadialFunction, b: RadialFunction, T: float, label: str = "") -> MetricChart:
    """Chart ``(t, theta, phi, psi)`` on ``(0,T) x (0,pi) x (0,2pi) x (0,4pi)``."""
    domain = ((0.0, T), (0.0, math.pi), (0.0, 2 * math.pi), (0.0, 4 * math.pi))
    return MetricChart(g=lambda x: _cohom_parts(a, b, x)[0], dg=lambda x: _cohom_parts(a, b, x)[1],
                       d2g=lambda x: _cohom_parts(a, b, x)[2], domain=domain, label=label)


def radial_potential(fn: RadialFunction, m: float, lam: float) -> QEData:
    def df(x):
        out = np.zeros_like(x)
        out[:, 0] = fn.d1(x[:, 0])
        return out

    def d2f(x):
        out = np.zeros(x.shape + (x.shape[1],))
        out[:, 0, 0] = fn.d2(x[:, 0])
        return out

    return QEData(f=lambda x: fn.value(x[:, 0]), df=df, d2f=d2f, m=m, lam=lam)


# profile import

PROFILE_COEFFICIENTS = ("a", "b")


@dataclass(frozen=True)
class ImportedProfile:
    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    f: np.ndarray
    m: float
    lam: float
    provenance: str = ""

    def __post_init__(self):
        validate_profile(self.t, {"a": self.a, "b": self.b}, self.f)

    @property
    def T(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def f_osc(self) -> float:
        return float(self.f.max() - self.f.min())

    @property
    def diameter_proxy(self) -> float:
        """Length of the ``t`` interval; a proxy, not a certified diameter."""
        return self.T

    def osc_check(self, rtol: float = 1e-12) -> tuple[float, float, bool]:
        """``(f_osc, osc_bound(m), f_osc <= osc_bound(m))``."""
        bound = osc_bound(self.m)
        return self.f_osc, bound, self.f_osc <= bound * (1.0 + rtol)


def validate_profile(t, coefficients: dict, f, first_row: int = 1) -> None:
    """Raise :class:`ProfileError` naming the first offending data row (1-based)."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or len(t) < 4:
        raise ProfileError("a profile needs at least 4 samples")
    if not np.all(np.isfinite(t)):
        raise ProfileError(f"row {first_row + int(np.argmin(np.isfinite(t)))}: non-finite t")
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise ProfileError(f"row {first_row + int(np.argmax(steps <= 0)) + 1}: t is not strictly increasing")
    for name, col in list(coefficients.items()) + [("f", f)]:
        col = np.asarray(col, dtype=float)
        if col.shape != t.shape:
            raise ProfileError(f"column {name!r} has {col.size} values for {t.size} samples")
        if not np.all(np.isfinite(col)):
            raise ProfileError(f"row {first_row + int(np.argmin(np.isfinite(col)))}, column {name!r}: non-finite value")
    for name, col in coefficients.items():
        interior = np.asarray(col, dtype=float)[1:-1]
        if np.any(interior <= 0):
            raise ProfileError(f"row {first_row + 1 + int(np.argmax(interior <= 0))}, column {name!r}: "
                               "metric coefficient must be positive on the open interval")


def load_profile(path) -> ImportedProfile:
    """Read ``t,a,b,f`` CSV with ``# m:``, ``# lambda:`` and ``# provenance:`` comment metadata."""
    meta = {}
    header = None
    rows = []
    row_lines = []
    try:
        fh = open(path)
    except OSError as exc:
        raise ProfileError(f"cannot read profile {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition(":")
                if sep:
                    meta[key.strip().lower()] = value.strip()
                continue
            cells = [c.strip() for c in line.split(",")]
            if header is None:
                header = cells
                expected = ["t", *PROFILE_COEFFICIENTS, "f"]
                if header != expected:
                    raise ProfileError(f"line {lineno}: header must be {','.join(expected)}, got {line!r}")
                continue
            if len(cells) != len(header):
                raise ProfileError(f"line {lineno}: expected {len(header)} fields, got {len(cells)}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ProfileError(f"line {lineno}: {exc}") from exc
            row_lines.append(lineno)
    if header is None:
        raise ProfileError("profile has no header")
    for key in ("m", "lambda"):
        if key not in meta:
            raise ProfileError(f"missing metadata comment '# {key}: <value>'")
    try:
        m, lam = float(meta["m"]), float(meta["lambda"])
    except ValueError as exc:
        raise ProfileError(f"bad metadata value: {exc}") from exc
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    try:
        validate_profile(data[:, 0], {"a": data[:, 1], "b": data[:, 2]}, data[:, 3])
    except ProfileError as exc:
        raise ProfileError(f"{path}: {exc} (data rows are counted from 1)") from exc
    return ImportedProfile(data[:, 0], data[:, 1], data[:, 2], data[:, 3], m, lam, meta.get("provenance", ""))


def write_profile(profile: ImportedProfile, path) -> None:
    with open(path, "w") as fh:
        if profile.provenance:
            fh.write(f"# provenance: {profile.provenance}\n")
        fh.write(f"# m: {profile.m!r}\n# lambda: {profile.lam!r}\n")
        fh.write("t,a,b,f\n")
        for row in zip(profile.t, profile.a, profile.b, profile.f):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def profile_chart(profile: ImportedProfile) -> tuple[MetricChart, QEData]:
    t = profile.t - profile.t[0]
    a = RadialFunction.spline(t, profile.a)
    b = RadialFunction.spline(t, profile.b)
    f = RadialFunction.spline(t, profile.f)
    chart = cohomogeneity_one_chart(a, b, profile.T, label="imported-profile")
    return chart, radial_potential(f, profile.m, profile.lam)


def _analytic(fn, d1, d2) -> RadialFunction:
    return RadialFunction(fn, d1, d2)


def sphere_profile_functions():
    """``a = b = sin(t)/2`` on ``[0, pi]``: the unit round 4-sphere."""
    h = _analytic(lambda t: 0.5 * np.sin(t), lambda t: 0.5 * np.cos(t), lambda t: -0.5 * np.sin(t))
    return h, h, math.pi


def cp2_profile_functions():
    """``b = sin(t)/2``, ``a = sin(t)cos(t)/2`` on ``[0, pi/2]``: Fubini-Study with Ric = 6g."""
    b = _analytic(lambda t: 0.5 * np.sin(t), lambda t: 0.5 * np.cos(t), lambda t: -0.5 * np.sin(t))
    a = _analytic(lambda t: 0.25 * np.sin(2 * t), lambda t: 0.5 * np.cos(2 * t), lambda t: -np.sin(2 * t))
    return a, b, math.pi / 2


def sample_profile(kind: str, samples: int = 201, m: float = 2.0, f: Optional[Callable] = None) -> ImportedProfile:
    """Sampled analytic profile (``sphere4`` or ``cp2``); ``f`` defaults to zero."""
    if kind == "sphere4":
        a, b, T = sphere_profile_functions()
        lam = 3.0
        note = "round unit 4-sphere sampled from a = b = sin(t)/2"
    elif kind == "cp2":
        a, b, T = cp2_profile_functions()
        lam = 6.0
        note = "Fubini-Study CP2 sampled from b = sin(t)/2, a = sin(2t)/4"
    else:
        raise ParameterError(f"unknown sample profile {kind!r}")
    t = np.linspace(0.0, T, samples)
    fv = np.zeros_like(t) if f is None else np.asarray(f(t), dtype=float)
    return ImportedProfile(t, a.value(t), b.value(t), fv, m, lam, note)


# fixture builders

def _sphere_expected(r: float, chi=2.0, tau=0.0) -> dict:
    return {
        "chi": Expected(chi, "Euler characteristic of S4"),
        "tau": Expected(tau, "S4 has no middle cohomology"),
        "R": Expected(12.0 / r**2, "Ric = 3/r^2 g"),
        "lambda": Expected(3.0 / r**2, "Einstein constant R/4"),
        "vol": Expected(8.0 * math.pi**2 / 3.0 * r**4, "volume of the round 4-sphere"),
        "diameter": Expected(math.pi * r, "half a great circle"),
        "ric_min": Expected(3.0 / r**2, "Einstein"),
        "ric_max": Expected(3.0 / r**2, "Einstein"),
    }


def _positive(params: dict, *names):
    for name in names:
        v = params[name]
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ParameterError(f"{name} must be a positive number, got {v!r}")


def build(spec: FixtureSpec) -> Fixture:
    """Chart, optional trivial quasi-Einstein data, expected invariants and default quadrature."""
    p = spec.resolved()
    kind = spec.kind
    if kind != "imported-profile":
        _positive(p, "m")
    hyper = QuadratureSpec(16, compactification="hyperspherical")
    stereo_box = tuple((-1.5, 1.5) for _ in range(4))
    if kind == "sphere4":
        _positive(p, "r")
        r = float(p["r"])
        return Fixture(spec, sphere_chart(r), constant_potential(p["m"], 3.0 / r**2),
                       _sphere_expected(r), hyper, stereo_box)
    if kind == "perturbed-sphere4":
        eps = p["eps"]
        if not (isinstance(eps, (int, float)) and math.isfinite(eps)):
            raise ParameterError(f"eps must be a finite number, got {eps!r}")
        expected = {
            "chi": Expected(2.0, "diffeomorphic to S4"),
            "tau": Expected(0.0, "diffeomorphic to S4"),
        }
        return Fixture(spec, perturbed_sphere_chart(float(eps)), constant_potential(p["m"], 3.0), expected, hyper,
                       stereo_box, flags=(EXPECTED_FAIL,) if eps != 0 else ())
    if kind == "torus4":
        _positive(p, "side")
        side = float(p["side"])
        expected = {
            "chi": Expected(0.0, "flat torus"),
            "tau": Expected(0.0, "flat torus"),
            "R": Expected(0.0, "flat"),
            "lambda": Expected(0.0, "flat; lambda = 0 so not a compact quasi-Einstein example"),
            "vol": Expected(side**4, "box volume"),
            "diameter": Expected(side, "half-diagonal of the fundamental cube"),
            "ric_min": Expected(0.0, "flat"),
            "ric_max": Expected(0.0, "flat"),
        }
        margin = 0.1 * side
        return Fixture(spec, flat_chart(side), constant_potential(p["m"], 0.0), expected,
                       QuadratureSpec(8), tuple((margin, side - margin) for _ in range(4)), flags=(NOT_COMPACT_QE,))
    if kind == "s2xs2":
        _positive(p, "r1", "r2")
        r1, r2 = float(p["r1"]), float(p["r2"])
        k1, k2 = 1.0 / r1**2, 1.0 / r2**2
        expected = {
            "chi": Expected(4.0, "product of two 2-spheres"),
            "tau": Expected(0.0, "orientation-reversing symmetry"),
            "R": Expected(2.0 * (k1 + k2), "sum of factor scalar curvatures"),
            "vol": Expected(16.0 * math.pi**2 * r1**2 * r2**2, "product of factor areas"),
            "diameter": Expected(math.pi * math.hypot(r1, r2), "product of factor diameters"),
            "ric_min": Expected(min(k1, k2), "factor Gauss curvatures"),
            "ric_max": Expected(max(k1, k2), "factor Gauss curvatures"),
        }
        qe = None
        if math.isclose(r1, r2, rel_tol=1e-14):
            qe = constant_potential(p["m"], k1)
            expected["lambda"] = Expected(k1, "Einstein when the radii agree")
        return Fixture(spec, product_s2_chart(r1, r2), qe, expected,
                       QuadratureSpec(16, compactification="polar-pair"), stereo_box)
    if kind == "cp2-fubini-study":
        expected = {
            "chi": Expected(3.0, "Euler characteristic of CP2"),
            "tau": Expected(1.0, "signature of CP2 with the complex orientation"),
            "R": Expected(24.0, "Ric = 6g"),
            "lambda": Expected(6.0, "Ric = 6g"),
            "vol": Expected(math.pi**2 / 2.0, "holomorphic sectional curvature 4"),
            "diameter": Expected(math.pi / 2.0, "holomorphic sectional curvature 4"),
            "ric_min": Expected(6.0, "Einstein"),
            "ric_max": Expected(6.0, "Einstein"),
        }
        return Fixture(spec, cp2_chart(), constant_potential(p["m"], 6.0), expected, hyper, stereo_box)
    # imported-profile
    if p["path"] is None:
        raise ParameterError("imported-profile needs a path")
    profile = load_profile(p["path"])
    chart, qe = profile_chart(profile)
    expected = {
        "f_osc": Expected(profile.f_osc, "max f - min f over samples"),
        "diameter_proxy": Expected(profile.T, "length of the t interval (proxy)"),
    }
    T = profile.T
    box = ((0.1 * T, 0.9 * T), (0.3, math.pi - 0.3), (0.5, 2 * math.pi - 0.5), (0.5, 4 * math.pi - 0.5))
    return Fixture(spec, chart, qe, expected, QuadratureSpec(16), box, profile=profile)


def fixture(kind: str, **params) -> Fixture:
    return build(FixtureSpec(kind, params))
