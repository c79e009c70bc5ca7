"""Residuals of the m-quasi-Einstein structure equations.

The structure is ``Ric + Hess f - (1/m) df (x) df = lambda g``.  Every
residual here is zero for an exact structure; the functions accept a single
point or a batch ``(N, n)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import fd
from .errors import DomainError, ParameterError
from .quadrature import QuadratureSpec, evaluate_chunked, nodes, weighted_sum
from .tensor import (
    MetricChart,
    _as_batch,
    _curvature_from_derivatives,
    _require_inside,
    check_spd,
    scalar_field,
)

ScalarFn = Callable[[np.ndarray], np.ndarray]

# step for derivatives of the computed R field, relative to the metric step
R_STEP_FACTOR = 10.0


@dataclass(frozen=True)
class QEData:
    """Potential ``f`` with optional analytic ``df`` (N, n) and ``d2f`` (N, n, n)."""

    f: ScalarFn
    m: float
    lam: float
    n: int = 4
    df: Optional[Callable[[np.ndarray], np.ndarray]] = None
    d2f: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if not self.m > 0:
            raise ParameterError(f"m must be positive, got {self.m!r}")

    def with_lambda(self, lam: float) -> "QEData":
        return QEData(self.f, self.m, lam, self.n, self.df, self.d2f)

    def with_m(self, m: float) -> "QEData":
        return QEData(self.f, m, self.lam, self.n, self.df, self.d2f)


def constant_potential(m: float, lam: float, n: int = 4, value: float = 0.0) -> QEData:
    """Trivial structure ``f = value`` (with exact zero derivatives)."""
    return QEData(
        f=lambda x: np.full(np.atleast_2d(x).shape[0], value),
        m=m, lam=lam, n=n,
        df=lambda x: np.zeros(np.atleast_2d(x).shape),
        d2f=lambda x: np.zeros(np.atleast_2d(x).shape + (np.atleast_2d(x).shape[1],)),
    )


def _require_four_dims(qe: QEData) -> None:
    if qe.n != 4:
        raise ParameterError(f"these identities are stated in dimension 4, got n = {qe.n}")
    if not qe.m > 1:
        raise ParameterError(f"these identities need m > 1, got m = {qe.m}")


def potential_derivatives(chart: MetricChart, qe: QEData, x: np.ndarray):
    """``(f, df, d2f)`` at a batch of points, analytic where supplied."""
    h = chart.step()
    fv = np.asarray(qe.f(x), dtype=float)
    df = np.asarray(qe.df(x), dtype=float) if qe.df is not None else fd.gradient(qe.f, x, h)
    d2f = np.asarray(qe.d2f(x), dtype=float) if qe.d2f is not None else fd.hessian(qe.f, x, h)
    return fv, df, 0.5 * (d2f + np.swapaxes(d2f, -1, -2))


@dataclass
class PointData:
    """Curvature plus potential data at a batch of points."""

    bundle: object
    f: np.ndarray
    df: np.ndarray
    grad_f: np.ndarray
    hess_f: np.ndarray
    lap_f: np.ndarray
    grad_f_norm2: np.ndarray


def point_data(chart: MetricChart, qe: QEData, x: np.ndarray, with_weyl: bool = False) -> PointData:
    if chart.dim != qe.n:
        raise ParameterError(f"chart dimension {chart.dim} does not match n = {qe.n}")
    _require_inside(chart, x)
    g = chart.metric(x)
    check_spd(g)
    dg, d2g = chart.metric_derivatives(x)
    b = _curvature_from_derivatives(chart, x, g, dg, d2g, with_weyl)
    fv, df, d2f = potential_derivatives(chart, qe, x)
    hess = d2f - np.einsum("nkij,nk->nij", b.christoffel, df)
    grad = np.einsum("nij,nj->ni", b.metric_inv, df)
    return PointData(
        bundle=b, f=fv, df=df, grad_f=grad, hess_f=hess,
        lap_f=np.einsum("nij,nij->n", b.metric_inv, hess),
        grad_f_norm2=np.einsum("ni,ni->n", grad, df),
    )


def _unbatch(value, single):
    return value[0] if single else value


@dataclass
class QEResidual:
    tensor: np.ndarray
    norm: np.ndarray


def qe_residual(chart: MetricChart, qe: QEData, p) -> QEResidual:
    """``Ric + Hess f - (1/m) df (x) df - lambda g`` and its g-norm."""
    x, single = _as_batch(p, chart.dim)
    pd = point_data(chart, qe, x)
    b = pd.bundle
    t = b.ricci + pd.hess_f - np.einsum("ni,nj->nij", pd.df, pd.df) / qe.m - qe.lam * b.metric
    norm = np.sqrt(np.einsum("nia,njb,nij,nab->n", b.metric_inv, b.metric_inv, t, t))
    return QEResidual(_unbatch(t, single), _unbatch(norm, single))


def trace_residual(chart: MetricChart, qe: QEData, p):
    """``R + Delta f - |grad f|^2/m - n lambda`` (trace of the structure equation, any n)."""
    x, single = _as_batch(p, chart.dim)
    pd = point_data(chart, qe, x)
    r = pd.bundle.scalar + pd.lap_f - pd.grad_f_norm2 / qe.m - qe.n * qe.lam
    return _unbatch(r, single)


def scalar_derivatives(chart: MetricChart, x: np.ndarray):
    """``(grad of R in coordinates, Hessian matrix of R)`` by differences of the computed R field."""
    h_r = R_STEP_FACTOR * chart.step()
    clearance = 2.0 * h_r + (0.0 if chart.analytic else chart.step())
    if not np.all(chart.contains(x, clearance)):
        raise DomainError(f"finite differences of R need clearance {clearance:g} inside chart {chart.label!r}")
    field = scalar_field(chart)
    return fd.gradient(field, x, h_r), fd.hessian(field, x, h_r)


def curvature_identity_residuals(chart: MetricChart, qe: QEData, p):
    """Residuals ``(r1, |r2|, r3)`` of the three four-dimensional curvature identities.

    * ``r1 = R + Delta f - |grad f|^2/m - 4 lambda``
    * ``r2 = 1/2 grad R - (m-1)/m Ric(grad f) - (R - 3 lambda)/m grad f`` (g-norm)
    * ``r3 = Delta R - [(m+2)/m <grad R, grad f> - 2(m-1)/m |Ric|^2 - 2/m R^2
      + 2(m+6)/m lambda R - 24/m lambda^2]``
    """
    _require_four_dims(qe)
    x, single = _as_batch(p, chart.dim)
    pd = point_data(chart, qe, x)
    b = pd.bundle
    # coefficients in k = 1/m so that m = inf gives the soliton limit
    k, lam, R = 1.0 / qe.m, qe.lam, b.scalar
    dR, d2R = scalar_derivatives(chart, x)
    lap_R = np.einsum("nij,nij->n", b.metric_inv, d2R - np.einsum("nkij,nk->nij", b.christoffel, dR))
    r1 = R + pd.lap_f - pd.grad_f_norm2 * k - 4.0 * lam
    grad_R = np.einsum("nij,nj->ni", b.metric_inv, dR)
    ric_grad_f = np.einsum("nij,nj->ni", b.ricci_endo, pd.grad_f)
    v = 0.5 * grad_R - (1.0 - k) * ric_grad_f - k * (R - 3.0 * lam)[:, None] * pd.grad_f
    r2 = np.sqrt(np.einsum("ni,nij,nj->n", v, b.metric, v))
    dot = np.einsum("ni,ni->n", dR, pd.grad_f)
    rhs3 = ((1.0 + 2.0 * k) * dot - 2.0 * (1.0 - k) * b.ricci_norm2 - 2.0 * k * R**2
            + 2.0 * (1.0 + 6.0 * k) * lam * R - 24.0 * k * lam**2)
    r3 = lap_R - rhs3
    return _unbatch(r1, single), _unbatch(r2, single), _unbatch(r3, single)


def u_identity_residual(chart: MetricChart, qe: QEData, p, method: str = "chain"):
    """``Delta u - (R - n lambda) u / m`` with ``u = exp(-f/m)``.

    ``method="chain"`` builds ``Delta u`` from the derivatives of ``f``;
    ``method="fd"`` differentiates the ``u`` field directly.
    """
    x, single = _as_batch(p, chart.dim)
    pd = point_data(chart, qe, x)
    b = pd.bundle
    m = qe.m
    u = np.exp(-pd.f / m)
    if method == "chain":
        lap_u = u * (pd.grad_f_norm2 / m**2 - pd.lap_f / m)
    elif method == "fd":
        def ufield(pts):
            return np.exp(-np.asarray(qe.f(pts), dtype=float) / m)
        h = chart.step()
        du = fd.gradient(ufield, x, h)
        d2u = fd.hessian(ufield, x, h)
        lap_u = np.einsum("nij,nij->n", b.metric_inv, d2u - np.einsum("nkij,nk->nij", b.christoffel, du))
    else:
        raise ParameterError(f"unknown method {method!r}")
    r = lap_u - (b.scalar - qe.n * qe.lam) * u / m
    return _unbatch(r, single)


@dataclass
class ScalarBoundReport:
    min_R: float
    threshold: float
    passed: bool
    witness: np.ndarray


def scalar_bound_threshold(m: float, lam: float) -> float:
    """``12 lambda / (m + 3)``."""
    return 12.0 * lam / (m + 3.0)


def scalar_bound_check(chart: MetricChart, qe: QEData, points) -> ScalarBoundReport:
    """Compare the sampled minimum of ``R`` with ``12 lambda/(m+3)``."""
    _require_four_dims(qe)
    if not qe.lam > 0:
        raise ParameterError("the scalar curvature bound needs lambda > 0")
    x, _ = _as_batch(points, chart.dim)
    if len(x) == 0:
        raise ParameterError("empty sample")
    _require_inside(chart, x)
    R = scalar_field(chart)(x)
    i = int(np.argmin(R))
    threshold = scalar_bound_threshold(qe.m, qe.lam)
    return ScalarBoundReport(float(R[i]), threshold, bool(R[i] >= threshold), x[i].copy())


def gradient_fields(chart: MetricChart, qe: QEData, x: np.ndarray) -> dict:
    """Per-point ``|grad f|^2``, ``R |grad f|^2`` and ``<grad R, grad f>``.

    ``<grad R, grad f>`` is the derivative of ``R`` along ``grad f``, taken by
    a central difference of the computed ``R`` field with step ``10 h``.
    """
    pd = point_data(chart, qe, x)
    return {
        "R": pd.bundle.scalar,
        "grad_f_norm2": pd.grad_f_norm2,
        "R_grad_f_norm2": pd.bundle.scalar * pd.grad_f_norm2,
        "f": pd.f,
        "dR_grad_f": dR_along_grad_f(chart, x, pd),
    }


def dR_along_grad_f(chart: MetricChart, x: np.ndarray, pd: PointData) -> np.ndarray:
    """``<grad R, grad f>`` per point; exactly zero where ``grad f`` vanishes."""
    dot = np.zeros(len(x))
    moving = pd.grad_f_norm2 > 0
    if np.any(moving):
        h_r = R_STEP_FACTOR * chart.step()
        # coordinate-unit direction keeps the stencil size fixed in the chart
        scale = np.linalg.norm(pd.grad_f[moving], axis=-1)
        unit = pd.grad_f[moving] / scale[:, None]
        dot[moving] = fd.directional(scalar_field(chart), x[moving], unit, h_r) * scale
    return dot


@dataclass
class OscIntegralCheck:
    lhs: float
    rhs: float
    f_osc: float
    vol: float
    passed: bool


def oscf_rhs(m: float, lam: float, vol: float, f_osc: float) -> float:
    """``2 m^2/((m+3)(m+2)) lam^2 vol (exp(f_osc (m+2)/m) - 1)``."""
    k = 1.0 / m
    return 2.0 / ((1.0 + 3.0 * k) * (1.0 + 2.0 * k)) * lam**2 * vol * math.expm1(f_osc * (1.0 + 2.0 * k))


def oscf_integral_check(chart: MetricChart, qe: QEData, quad: QuadratureSpec, tol: float = 1e-8) -> OscIntegralCheck:
    """Compare ``int <grad R, grad f>`` with its sub-level-set upper bound.

    ``f_osc`` is the spread of ``f`` over the quadrature nodes.
    """
    _require_four_dims(qe)
    x, w = nodes(chart, quad)
    fields = evaluate_chunked(lambda pts: _osc_fields(chart, qe, pts), x)
    lhs = weighted_sum(w, fields["dR_grad_f"] * fields["vol"])
    vol = weighted_sum(w, fields["vol"])
    f_osc = float(fields["f"].max() - fields["f"].min())
    rhs = oscf_rhs(qe.m, qe.lam, vol, f_osc)
    return OscIntegralCheck(lhs, rhs, f_osc, vol, bool(lhs <= rhs + tol * max(1.0, abs(rhs))))


def _osc_fields(chart, qe, pts):
    out = gradient_fields(chart, qe, pts)
    out["vol"] = np.sqrt(np.linalg.det(chart.metric(pts)))
    return out


RESIDUAL_COLUMNS = ("r1", "r2_norm", "r3", "qe_residual_norm")


def export_residual_csv(chart: MetricChart, qe: QEData, points, path) -> None:
    """One row per point: coordinates, r1, |r2|, r3, |qe residual|."""
    x, _ = _as_batch(points, chart.dim)
    r1, r2, r3 = curvature_identity_residuals(chart, qe, x)
    res = qe_residual(chart, qe, x).norm
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(chart.dim)] + list(RESIDUAL_COLUMNS))
        for i in range(len(x)):
            writer.writerow([f"{v:.12g}" for v in list(x[i]) + [r1[i], r2[i], r3[i], res[i]]])


__all__ = [
    "QEData", "constant_potential", "qe_residual", "trace_residual", "curvature_identity_residuals",
    "u_identity_residual", "scalar_bound_check", "oscf_integral_check", "export_residual_csv",
]
