"""Curvature integrals over compact four-dimensional fixtures.

Integrands are evaluated once per quadrature node and every integral is a
weighted sum of the same node arrays, so algebraic relations between the
reported numbers hold to rounding.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import BoundsInput, ScalarIntegralResult, scalar_integral_criterion
from .errors import HypothesisViolation, ParameterError
from .qe import QEData, dR_along_grad_f, point_data, qe_residual
from .quadrature import QuadratureSpec, evaluate_chunked, nodes, weighted_sum
from .tensor import MetricChart, curvature_batch

EIGHT_PI2 = 8.0 * math.pi**2
TWELVE_PI2 = 12.0 * math.pi**2
FOUR_PI2 = 4.0 * math.pi**2

INTEGRAL_KEYS = (
    "wplus_norm2", "wminus_norm2", "R2", "traceless_ricci_norm2", "vol", "R",
    "dR_grad_f", "R_grad_f_norm2", "grad_f_norm2",
)

# smallest error estimate reported, to stay above summation noise
ERROR_FLOOR = 1e-12


@dataclass
class NodeFields:
    """Per-node integrand values; ``weights`` already include the volume density."""

    points: np.ndarray
    weights: np.ndarray
    values: dict

    def integral(self, name_or_values) -> float:
        v = self.values[name_or_values] if isinstance(name_or_values, str) else name_or_values
        return weighted_sum(self.weights, v)


def _node_fields(chart: MetricChart, qe: Optional[QEData], pts: np.ndarray) -> dict:
    if qe is None:
        b = curvature_batch(chart, pts)
        zeros = np.zeros(len(pts))
        grad2, dot, fvals = zeros, zeros, zeros
    else:
        pd = point_data(chart, qe, pts, with_weyl=True)
        b = pd.bundle
        grad2, fvals = pd.grad_f_norm2, pd.f
        dot = dR_along_grad_f(chart, pts, pd)
    return {
        "density": b.vol_density,
        "wplus_norm2": b.wplus_norm2,
        "wminus_norm2": b.wminus_norm2,
        "R2": b.scalar**2,
        "traceless_ricci_norm2": b.traceless_ricci_norm2,
        "vol": np.ones(len(pts)),
        "R": b.scalar,
        "dR_grad_f": dot,
        "R_grad_f_norm2": b.scalar * grad2,
        "grad_f_norm2": grad2,
        "f": fvals,
    }


def evaluate_fields(chart: MetricChart, quad: QuadratureSpec, qe: Optional[QEData] = None,
                    per_axis: Optional[int] = None) -> NodeFields:
    if chart.dim != 4:
        raise ParameterError(f"curvature integrals need a 4-dimensional chart, got dim = {chart.dim}")
    x, w = nodes(chart, quad, per_axis)
    values = evaluate_chunked(lambda pts: _node_fields(chart, qe, pts), x)
    return NodeFields(x, w * values.pop("density"), values)


def _chi_tau(nf: NodeFields) -> tuple[float, float]:
    v = nf.values
    gbc = v["wplus_norm2"] + v["wminus_norm2"] + v["R2"] / 24.0 - 0.5 * v["traceless_ricci_norm2"]
    return nf.integral(gbc) / EIGHT_PI2, nf.integral(v["wplus_norm2"] - v["wminus_norm2"]) / TWELVE_PI2


def _ht(nf: NodeFields) -> tuple[float, float]:
    v = nf.values
    common = v["R2"] / 24.0 - 0.5 * v["traceless_ricci_norm2"]
    return (nf.integral(2.0 * v["wplus_norm2"] + common) / FOUR_PI2,
            nf.integral(2.0 * v["wminus_norm2"] + common) / FOUR_PI2)


@dataclass
class TopologyReport:
    """Curvature-integral estimates of the Euler characteristic and signature.

    ``ht_plus``/``ht_minus`` come from integrating the combined integrand
    directly; ``route_gap`` is their largest relative distance from
    ``2 chi_hat +- 3 tau_hat``.  ``chi_err``/``tau_err`` compare against a run
    with half the nodes per axis.
    """

    chi_hat: float
    tau_hat: float
    ht_plus: float
    ht_minus: float
    integrals: dict
    chi_err: Optional[float] = None
    tau_err: Optional[float] = None
    route_gap: float = 0.0
    nodes_per_axis: int = 0
    fields: Optional[NodeFields] = field(default=None, repr=False)

    @property
    def ht_pass(self) -> bool:
        return ht_verdict(self.ht_plus, self.ht_minus)


def ht_verdict(ht_plus: float, ht_minus: float, tol: float = 1e-6) -> bool:
    return ht_plus >= -tol and ht_minus >= -tol


def _route_gap(chi, tau, ht_plus, ht_minus) -> float:
    gaps = []
    for direct, algebraic in ((ht_plus, 2 * chi + 3 * tau), (ht_minus, 2 * chi - 3 * tau)):
        gaps.append(abs(direct - algebraic) / max(1.0, abs(algebraic)))
    return max(gaps)


def coarse_nodes(n: int) -> int:
    """Node count of the comparison run used for error estimates."""
    return max(4, n // 2)


def topology_report(chart: MetricChart, quad: QuadratureSpec, qe: Optional[QEData] = None,
                    estimate_error: bool = True) -> TopologyReport:
    nf = evaluate_fields(chart, quad, qe)
    chi, tau = _chi_tau(nf)
    hp, hm = _ht(nf)
    integrals = {key: nf.integral(key) for key in INTEGRAL_KEYS}
    report = TopologyReport(chi, tau, hp, hm, integrals, route_gap=_route_gap(chi, tau, hp, hm),
                            nodes_per_axis=quad.nodes_per_axis, fields=nf)
    if estimate_error:
        coarse = evaluate_fields(chart, quad, None, per_axis=coarse_nodes(quad.nodes_per_axis))
        chi_c, tau_c = _chi_tau(coarse)
        report.chi_err = max(abs(chi - chi_c), ERROR_FLOOR)
        report.tau_err = max(abs(tau - tau_c), ERROR_FLOOR)
    return report


def gauss_bonnet_chern(chart: MetricChart, quad: QuadratureSpec) -> float:
    """Euler characteristic estimate ``(1/8 pi^2) int (|W|^2 + R^2/24 - |traceless Ric|^2/2)``."""
    return _chi_tau(evaluate_fields(chart, quad))[0]


def hirzebruch(chart: MetricChart, quad: QuadratureSpec) -> float:
    """Signature estimate ``(1/12 pi^2) int (|W+|^2 - |W-|^2)``."""
    return _chi_tau(evaluate_fields(chart, quad))[1]


def ht_check(chart: MetricChart, quad: QuadratureSpec, tol: float = 1e-6) -> tuple[float, float, bool]:
    """``(2 chi + 3 tau, 2 chi - 3 tau, both >= -tol)`` from the combined integrand."""
    hp, hm = _ht(evaluate_fields(chart, quad))
    return hp, hm, ht_verdict(hp, hm, tol)


def euler_identity_rhs(integrals: dict, m: float, lam: float) -> tuple[float, float]:
    """Right-hand sides of the two Euler-characteristic identities for quasi-Einstein data.

    ``integrals`` needs ``wplus_norm2``, ``wminus_norm2``, ``grad_f_norm2``,
    ``R_grad_f_norm2``, ``R2``, ``dR_grad_f`` and ``vol``.
    """
    if not m > 1:
        raise ParameterError(f"these identities need m > 1, got m = {m}")
    w2 = integrals["wplus_norm2"] + integrals["wminus_norm2"]
    g2, rg2, vol = integrals["grad_f_norm2"], integrals["R_grad_f_norm2"], integrals["vol"]
    # written in k = 1/m so that m = inf gives the soliton limit
    k = 1.0 / m
    q = 1.0 - k
    scal = (w2 + k * (1.0 - 2.0 * k) * lam / (2.0 * q) * g2 + k * (1.0 + 2.0 * k) / (4.0 * q) * rg2
            - (1.0 + 2.0 * k) / (12.0 * q) * integrals["R2"] + 2.0 * (1.0 + k) / q * lam**2 * vol)
    grad = (w2 + k * (1.0 - 10.0 * k) * lam / (6.0 * q) * g2 + k * (1.0 + 2.0 * k) / (6.0 * q) * rg2
            - (1.0 + 2.0 * k) / (12.0 * q) * integrals["dR_grad_f"] + 2.0 / 3.0 * lam**2 * vol)
    return scal, grad


@dataclass
class EulerIdentityResult:
    lhs: float
    rhs_scal: float
    rhs_grad: float
    residual_scal: float
    residual_grad: float
    gate_residual: float

    def passed(self, rtol: float) -> bool:
        scale = max(1.0, abs(self.lhs))
        return abs(self.residual_scal) <= rtol * scale and abs(self.residual_grad) <= rtol * scale


# nodes where the chart metric is worse conditioned than this are left out of
# the gate: rounding there is amplified by the degenerating coordinates, and
# such nodes carry negligible quadrature weight
GATE_MAX_COND = 1e3


def _gate_points(chart: MetricChart, x: np.ndarray, count: int) -> np.ndarray:
    x = x[np.linalg.cond(chart.metric(x)) <= GATE_MAX_COND]
    if len(x) <= count:
        return x
    return x[np.linspace(0, len(x) - 1, count).astype(int)]


def qe_gate(chart: MetricChart, qe: QEData, points: np.ndarray, gate_tol: float) -> float:
    """Largest structure-equation residual over ``points``; raises if above ``gate_tol``."""
    worst = float(np.max(qe_residual(chart, qe, points).norm))
    if not worst <= gate_tol:
        raise HypothesisViolation(
            f"input is not quasi-Einstein: structure residual {worst:.3g} exceeds gate {gate_tol:.3g}; "
            "the Euler-characteristic identities do not apply")
    return worst


def euler_identity_check(chart: MetricChart, qe: QEData, quad: QuadratureSpec, gate_tol: float = 1e-6,
                 gate_samples: int = 256, report: Optional[TopologyReport] = None) -> EulerIdentityResult:
    """Evaluate both identities numerically; residuals are ``rhs - 8 pi^2 chi_hat``."""
    if not qe.m > 1:
        raise ParameterError(f"these identities need m > 1, got m = {qe.m}")
    if qe.n != 4:
        raise ParameterError("these identities are four-dimensional")
    if report is None:
        report = topology_report(chart, quad, qe, estimate_error=False)
    gate = qe_gate(chart, qe, _gate_points(chart, report.fields.points, gate_samples), gate_tol)
    lhs = EIGHT_PI2 * report.chi_hat
    scal, grad = euler_identity_rhs(report.integrals, qe.m, qe.lam)
    return EulerIdentityResult(lhs, scal, grad, scal - lhs, grad - lhs, gate)


@dataclass
class GurskyResult:
    lower: float
    wplus_integral: float
    w_integral: float
    first_holds: bool
    second_holds: bool
    passed: bool
    note: str = ""


def gursky_check(chart: MetricChart, quad: QuadratureSpec, assert_first: bool = True,
                 tol: float = 1e-6, report: Optional[TopologyReport] = None) -> GurskyResult:
    """``8 pi^2 (chi - 2) <= int |W+|^2 <= int |W|^2`` under positive scalar curvature.

    With ``assert_first=False`` the first inequality is still evaluated and
    reported but does not decide ``passed``.
    """
    if report is None:
        report = topology_report(chart, quad, estimate_error=False)
    r_min = float(np.min(report.fields.values["R"]))
    if not r_min > 0:
        raise HypothesisViolation(f"positive scalar curvature required; sampled min R = {r_min:.6g}")
    i = report.integrals
    lower = EIGHT_PI2 * (report.chi_hat - 2.0)
    wp, w = i["wplus_norm2"], i["wplus_norm2"] + i["wminus_norm2"]
    scale = max(1.0, abs(w))
    first = lower <= wp + tol * scale
    second = wp <= w + tol * scale
    note = "" if first or assert_first else "first inequality fails here and is reported only"
    return GurskyResult(lower, wp, w, first, second, second and (first or not assert_first), note)


@dataclass
class YamabeIntegralResult:
    value: float
    identity_lhs: float
    identity_rhs: float
    passed: bool


def yamabe_integral_check(chart: MetricChart, quad: QuadratureSpec, rtol: float = 1e-6,
                          report: Optional[TopologyReport] = None) -> YamabeIntegralResult:
    """``int (R^2 - 12 |traceless Ric|^2)`` and the identity ``8 pi^2 chi - int |W|^2 = value/24``."""
    if report is None:
        report = topology_report(chart, quad, estimate_error=False)
    i = report.integrals
    value = i["R2"] - 12.0 * i["traceless_ricci_norm2"]
    lhs = EIGHT_PI2 * report.chi_hat - (i["wplus_norm2"] + i["wminus_norm2"])
    rhs = value / 24.0
    return YamabeIntegralResult(value, lhs, rhs, abs(lhs - rhs) <= rtol * max(1.0, abs(rhs)))


def scalar_integral_on_chart(chart: MetricChart, qe: QEData, quad: QuadratureSpec,
                    report: Optional[TopologyReport] = None) -> ScalarIntegralResult:
    """The integral scalar-curvature criterion evaluated with quadrature ``int R^2`` and volume."""
    if report is None:
        report = topology_report(chart, quad, estimate_error=False)
    inp = BoundsInput(m=qe.m, lam=qe.lam, vol=report.integrals["vol"])
    return scalar_integral_criterion(report.integrals["R2"], inp)


INTEGRAND_COLUMNS = ("weight", "R", "wplus_norm2", "wminus_norm2", "traceless_ricci_norm2", "grad_f_norm2")


def export_integrand_csv(nf: NodeFields, path) -> None:
    """Node coordinates, weight (density included) and the integrand fields."""
    dim = nf.points.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(dim)] + list(INTEGRAND_COLUMNS))
        cols = [nf.weights] + [nf.values[k] for k in INTEGRAND_COLUMNS[1:]]
        for j in range(len(nf.points)):
            writer.writerow([f"{v:.12g}" for v in list(nf.points[j]) + [c[j] for c in cols]])
