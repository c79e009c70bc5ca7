"""Chart-based Riemannian curvature engine.

Conventions used throughout the package:

* ``R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`` and
  ``R_ijkl = g(R(d_i, d_j) d_k, d_l)``, so the sectional curvature of the
  plane ``(e_i, e_j)`` is ``R_ijji`` and the round sphere is positive.
* ``Ric_ij = g^kl R_iklj`` and ``R = g^ij Ric_ij``.
* The Laplacian is the trace of the Hessian.
* ``|W+-|^2`` is the sum of squared eigenvalues of ``W+-`` acting on unit
  (anti-)self-dual bivectors; equivalently ``|W|^2 = |W+|^2 + |W-|^2`` is a
  quarter of the full tensor norm ``W_ijkl W^ijkl``.  ``|Ric|^2`` and
  ``|traceless Ric|^2`` are ordinary tensor norms.

Metric callables are batched: ``g(points)`` maps ``(N, n)`` to ``(N, n, n)``;
``dg`` returns ``(N, n, n, n)`` with ``dg[:, k, i, j] = d_k g_ij`` and ``d2g``
returns ``(N, n, n, n, n)`` with ``d2g[:, k, l, i, j] = d_k d_l g_ij``.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import fd
from .comparison import GeodesicProfile
from .errors import DomainError, MetricError, ParameterError

BatchFn = Callable[[np.ndarray], np.ndarray]

_SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class MetricChart:
    """A coordinate chart carrying a Riemannian metric.

    ``domain`` is a box given as one ``(lo, hi)`` pair per axis; infinite
    bounds are allowed.  When ``dg``/``d2g`` are missing the derivatives are
    taken by central differences with step ``fd_step`` (default ``1e-3`` times
    the smallest finite box side, or ``1e-3`` on unbounded axes).
    """

    g: BatchFn
    dim: int = 4
    domain: Optional[tuple[tuple[float, float], ...]] = None
    dg: Optional[BatchFn] = None
    d2g: Optional[BatchFn] = None
    orientation: int = 1
    label: str = ""
    fd_step: Optional[float] = None

    def __post_init__(self):
        if self.dim < 2:
            raise ParameterError(f"chart dimension must be >= 2, got {self.dim}")
        if self.orientation not in (1, -1):
            raise ParameterError("orientation must be +1 or -1")
        if self.domain is None:
            object.__setattr__(self, "domain", tuple((-math.inf, math.inf) for _ in range(self.dim)))
        if len(self.domain) != self.dim:
            raise ParameterError("domain must give one interval per coordinate")

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.domain], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.domain], dtype=float)

    @property
    def analytic(self) -> bool:
        return self.dg is not None and self.d2g is not None

    def step(self) -> float:
        if self.fd_step is not None:
            return self.fd_step
        sides = self.upper - self.lower
        finite = sides[np.isfinite(sides)]
        return 1e-3 * float(finite.min()) if finite.size else 1e-3

    def contains(self, points: np.ndarray, clearance: float = 0.0) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points > self.lower + clearance) & (points < self.upper - clearance), axis=-1)

    def flipped(self) -> "MetricChart":
        """Same chart with the opposite orientation."""
        return dataclasses.replace(self, orientation=-self.orientation)

    def metric(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.g(np.atleast_2d(points)), dtype=float)

    def metric_derivatives(self, points: np.ndarray, second: bool = True):
        """Return ``(dg, d2g)``; ``d2g`` is ``None`` when ``second`` is false."""
        x = np.atleast_2d(points)
        h = self.step()
        if self.dg is not None:
            dg = np.asarray(self.dg(x), dtype=float)
        else:
            dg = fd.gradient(self._checked_metric, x, h)
        d2g = None
        if second:
            if self.d2g is not None:
                d2g = np.asarray(self.d2g(x), dtype=float)
            else:
                d2g = fd.hessian(self._checked_metric, x, h)
                d2g = 0.5 * (d2g + np.swapaxes(d2g, -1, -2))
        dg = 0.5 * (dg + np.swapaxes(dg, -1, -2))
        return dg, d2g

    def _checked_metric(self, points: np.ndarray) -> np.ndarray:
        g = self.metric(points)
        check_spd(g, where="finite-difference stencil point")
        return g


def check_spd(g: np.ndarray, where: str = "point") -> None:
    """Raise :class:`MetricError` unless every matrix in the batch is SPD."""
    if not np.allclose(g, np.swapaxes(g, -1, -2), rtol=1e-10, atol=1e-12):
        raise MetricError(f"metric is not symmetric at a {where}")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise MetricError(f"metric is not positive definite at a {where}") from exc


def _as_batch(points, dim: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(points, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != dim:
        raise ParameterError(f"expected points with {dim} coordinates, got shape {x.shape}")
    return x, single


def _require_inside(chart: MetricChart, x: np.ndarray) -> None:
    clearance = 0.0 if chart.analytic else chart.step()
    inside = chart.contains(x, clearance)
    if not np.all(inside):
        bad = x[~inside][0]
        raise DomainError(f"point {bad.tolist()} is outside chart {chart.label!r} (stencil clearance {clearance:g})")


def _christoffel(ginv: np.ndarray, dg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # first kind: gam1[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    gam1 = 0.5 * (np.einsum("nijl->nlij", dg) + np.einsum("njil->nlij", dg) - dg)
    return gam1, np.einsum("nkl,nlij->nkij", ginv, gam1)


def christoffel(chart: MetricChart, p) -> np.ndarray:
    """Levi-Civita symbols ``gamma[k, i, j] = Gamma^k_ij`` at ``p`` (or a batch of points)."""
    x, single = _as_batch(p, chart.dim)
    _require_inside(chart, x)
    g = chart.metric(x)
    check_spd(g)
    dg, _ = chart.metric_derivatives(x, second=False)
    _, gam = _christoffel(np.linalg.inv(g), dg)
    return gam[0] if single else gam


@dataclass
class CurvatureBundle:
    """Pointwise curvature data; every array carries a leading batch axis unless taken with :meth:`at`."""

    point: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    ricci_endo: np.ndarray
    scalar: np.ndarray
    traceless_ricci: np.ndarray
    ricci_norm2: np.ndarray
    traceless_ricci_norm2: np.ndarray
    vol_density: np.ndarray
    weyl: Optional[np.ndarray] = None
    wplus_eigs: Optional[np.ndarray] = None
    wminus_eigs: Optional[np.ndarray] = None
    wplus_norm2: Optional[np.ndarray] = None
    wminus_norm2: Optional[np.ndarray] = None
    weyl_norm2: Optional[np.ndarray] = None
    frame: Optional[np.ndarray] = field(default=None, repr=False)

    def at(self, i: int) -> "CurvatureBundle":
        values = {f.name: (None if getattr(self, f.name) is None else getattr(self, f.name)[i])
                  for f in dataclasses.fields(self)}
        return CurvatureBundle(**values)

    def __len__(self) -> int:
        return 1 if self.point.ndim == 1 else self.point.shape[0]


def _bivector_basis(sign: int) -> np.ndarray:
    pairs = [((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2))]
    basis = np.zeros((3, 4, 4))
    for idx, ((a, b), (c, d)) in enumerate(pairs):
        basis[idx, a, b], basis[idx, b, a] = _SQRT_HALF, -_SQRT_HALF
        basis[idx, c, d], basis[idx, d, c] = sign * _SQRT_HALF, -sign * _SQRT_HALF
    return basis


SELF_DUAL_BASIS = _bivector_basis(+1)
ANTI_SELF_DUAL_BASIS = _bivector_basis(-1)


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt of the coordinate frame: rows ``E[a]`` with ``E g E^T = I``."""
    return np.linalg.inv(np.linalg.cholesky(g))


def to_frame(tensor: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """Express a covariant 4-tensor in the orthonormal frame."""
    t = np.einsum("nai,nijkl->najkl", frame, tensor)
    t = np.einsum("nbj,najkl->nabkl", frame, t)
    t = np.einsum("nck,nabkl->nabcl", frame, t)
    return np.einsum("ndl,nabcl->nabcd", frame, t)


def bivector_operator(frame_tensor: np.ndarray, basis: np.ndarray, basis2: Optional[np.ndarray] = None) -> np.ndarray:
    """Matrix of a curvature-type tensor acting on unit bivectors.

    ``M_IJ = sum_{a<b, c<d} s_I^ab s_J^cd T_abdc`` so that the round sphere
    curvature operator is positive.
    """
    basis2 = basis if basis2 is None else basis2
    return 0.25 * np.einsum("Iab,Jcd,nabdc->nIJ", basis, basis2, frame_tensor)


def weyl_split(weyl: np.ndarray, frame: np.ndarray, orientation: int = 1):
    """Return ``(W+ block, W- block)`` as batched symmetric 3x3 matrices."""
    wf = to_frame(weyl, frame)
    plus, minus = SELF_DUAL_BASIS, ANTI_SELF_DUAL_BASIS
    if orientation < 0:
        plus, minus = minus, plus
    blocks = []
    for basis in (plus, minus):
        block = bivector_operator(wf, basis)
        blocks.append(0.5 * (block + np.swapaxes(block, -1, -2)))
    return blocks[0], blocks[1]


def _norm2(ginv: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.einsum("nia,njb,nij,nab->n", ginv, ginv, t, t)


def _curvature_from_derivatives(chart: MetricChart, x, g, dg, d2g, with_weyl=True) -> CurvatureBundle:
    n = chart.dim
    ginv = np.linalg.inv(g)
    gam1, gam = _christoffel(ginv, dg)
    # d_m Gamma_{l i j} and d_m g^{kl}
    dgam1 = 0.5 * (np.einsum("nmijl->nmlij", d2g) + np.einsum("nmjil->nmlij", d2g) - d2g)
    dginv = -np.einsum("nka,nmab,nbl->nmkl", ginv, dg, ginv)
    dgam = np.einsum("nmkl,nlij->nmkij", dginv, gam1) + np.einsum("nkl,nmlij->nmkij", ginv, dgam1)
    # R^l_{ijk} = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik, stored as rup[n, l, i, j, k]
    lin = np.einsum("niljk->nlijk", dgam)
    quad = np.einsum("nlim,nmjk->nlijk", gam, gam)
    rup = lin - np.swapaxes(lin, 2, 3) + quad - np.swapaxes(quad, 2, 3)
    riemann = np.einsum("nla,naijk->nijkl", g, rup)
    ricci = np.einsum("nkl,niklj->nij", ginv, riemann)
    ricci = 0.5 * (ricci + np.swapaxes(ricci, 1, 2))
    scalar = np.einsum("nij,nij->n", ginv, ricci)
    traceless = ricci - scalar[:, None, None] / n * g
    bundle = CurvatureBundle(
        point=x,
        metric=g,
        metric_inv=ginv,
        christoffel=gam,
        riemann=riemann,
        ricci=ricci,
        ricci_endo=np.einsum("nik,nkj->nij", ginv, ricci),
        scalar=scalar,
        traceless_ricci=traceless,
        ricci_norm2=_norm2(ginv, ricci),
        traceless_ricci_norm2=_norm2(ginv, traceless),
        vol_density=np.sqrt(np.linalg.det(g)),
    )
    if n >= 3 and with_weyl:
        bundle.weyl = weyl_tensor(riemann, ricci, scalar, g)
    if n == 4 and with_weyl:
        frame = orthonormal_frame(g)
        wp, wm = weyl_split(bundle.weyl, frame, chart.orientation)
        bundle.frame = frame
        bundle.wplus_eigs = np.linalg.eigvalsh(wp)
        bundle.wminus_eigs = np.linalg.eigvalsh(wm)
        bundle.wplus_norm2 = np.einsum("nij,nij->n", wp, wp)
        bundle.wminus_norm2 = np.einsum("nij,nij->n", wm, wm)
        bundle.weyl_norm2 = bundle.wplus_norm2 + bundle.wminus_norm2
    return bundle


def weyl_tensor(riemann, ricci, scalar, g) -> np.ndarray:
    """Weyl part of ``riemann`` (batched); requires dimension >= 3."""
    n = g.shape[-1]
    ric_part = (np.einsum("nik,njl->nijkl", ricci, g) + np.einsum("njl,nik->nijkl", ricci, g)
                - np.einsum("nil,njk->nijkl", ricci, g) - np.einsum("njk,nil->nijkl", ricci, g))
    gg = np.einsum("nik,njl->nijkl", g, g) - np.einsum("nil,njk->nijkl", g, g)
    s = scalar[:, None, None, None, None]
    return riemann + ric_part / (n - 2) - s * gg / ((n - 1) * (n - 2))


def curvature_batch(chart: MetricChart, points, with_weyl: bool = True) -> CurvatureBundle:
    """Curvature bundle at a batch of points ``(N, n)``."""
    x, _ = _as_batch(points, chart.dim)
    _require_inside(chart, x)
    g = chart.metric(x)
    check_spd(g)
    dg, d2g = chart.metric_derivatives(x)
    return _curvature_from_derivatives(chart, x, g, dg, d2g, with_weyl)


def curvature(chart: MetricChart, p) -> CurvatureBundle:
    """Full curvature bundle at a single point ``p`` (or a batch, passed through)."""
    x, single = _as_batch(p, chart.dim)
    bundle = curvature_batch(chart, x)
    return bundle.at(0) if single else bundle


def scalar_field(chart: MetricChart) -> BatchFn:
    """The scalar curvature as a batched field (used for finite differences of R)."""
    def field_(points):
        x = np.atleast_2d(points)
        g = chart.metric(x)
        dg, d2g = chart.metric_derivatives(x)
        return _curvature_from_derivatives(chart, x, g, dg, d2g, with_weyl=False).scalar
    return field_


@dataclass
class RicciExtremes:
    c: float
    C: float
    c_point: np.ndarray
    C_point: np.ndarray


def ricci_extremes(chart: MetricChart, points) -> RicciExtremes:
    """Smallest and largest Ricci eigenvalue over the sampled points."""
    x, _ = _as_batch(points, chart.dim)
    if x.shape[0] == 0:
        raise ParameterError("ricci_extremes needs at least one sample point")
    b = curvature_batch(chart, x, with_weyl=False)
    frame = orthonormal_frame(b.metric)
    ric_frame = np.einsum("nai,nij,nbj->nab", frame, b.ricci, frame)
    eigs = np.linalg.eigvalsh(0.5 * (ric_frame + np.swapaxes(ric_frame, 1, 2)))
    lo, hi = int(np.argmin(eigs[:, 0])), int(np.argmax(eigs[:, -1]))
    return RicciExtremes(float(eigs[lo, 0]), float(eigs[hi, -1]), x[lo].copy(), x[hi].copy())


def random_points(box: Sequence[tuple[float, float]], count: int, seed: int = 0) -> np.ndarray:
    """Uniform random points inside a finite box."""
    rng = np.random.default_rng(seed)
    lo = np.array([a for a, _ in box], dtype=float)
    hi = np.array([b for _, b in box], dtype=float)
    return lo + (hi - lo) * rng.random((count, len(box)))


def grid_points(box: Sequence[tuple[float, float]], per_axis: int) -> np.ndarray:
    """Cell-centred tensor grid inside a finite box."""
    axes = [a + (b - a) * (np.arange(per_axis) + 0.5) / per_axis for a, b in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass
class GeodesicRun:
    profile: GeodesicProfile
    points: np.ndarray
    velocities: np.ndarray
    truncated: bool
    step: float
    speed_drift: float


def _geodesic_rhs(chart: MetricChart, x: np.ndarray, v: np.ndarray):
    g = chart.metric(x[None])
    dg, _ = chart.metric_derivatives(x[None], second=False)
    _, gam = _christoffel(np.linalg.inv(g), dg)
    return v, -np.einsum("kij,i,j->k", gam[0], v, v)


def _integrate_geodesic(chart, x0, v0, length, step):
    n_steps = max(1, int(math.ceil(length / step - 1e-12)))
    h = length / n_steps
    clearance = 0.0 if chart.analytic else 2.0 * chart.step()
    xs, vs = [x0], [v0]
    x, v = x0, v0
    truncated = False
    for _ in range(n_steps):
        k1x, k1v = _geodesic_rhs(chart, x, v)
        stages = [(x + 0.5 * h * k1x, v + 0.5 * h * k1v)]
        k2x, k2v = _geodesic_rhs(chart, *stages[0])
        stages.append((x + 0.5 * h * k2x, v + 0.5 * h * k2v))
        k3x, k3v = _geodesic_rhs(chart, *stages[1])
        stages.append((x + h * k3x, v + h * k3v))
        if not np.all(chart.contains(np.array([s[0] for s in stages]), clearance)):
            truncated = True
            break
        k4x, k4v = _geodesic_rhs(chart, *stages[2])
        x_new = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v_new = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not chart.contains(x_new[None], clearance)[0]:
            truncated = True
            break
        x, v = x_new, v_new
        xs.append(x)
        vs.append(v)
    return np.array(xs), np.array(vs), h, truncated


def geodesic(chart: MetricChart, p, v, length: float, step: float,
             f: Optional[BatchFn] = None, drift_tol: float = 1e-6, max_halvings: int = 8) -> GeodesicRun:
    """Integrate the geodesic from ``p`` with initial direction ``v`` (normalised internally).

    Classical fixed-step RK4; the step is halved until the drift of the speed
    ``|gamma'|_g`` stays below ``drift_tol``.  If the curve leaves the chart
    the run stops early and ``truncated`` is set.
    """
    if step <= 0 or length <= 0:
        raise ParameterError("geodesic step and length must be positive")
    x0, _ = _as_batch(p, chart.dim)
    _require_inside(chart, x0)
    v0 = np.asarray(v, dtype=float)
    g0 = chart.metric(x0)[0]
    v0 = v0 / math.sqrt(v0 @ g0 @ v0)
    x0 = x0[0]
    for _ in range(max_halvings + 1):
        xs, vs, h, truncated = _integrate_geodesic(chart, x0, v0, length, step)
        speeds = np.sqrt(np.einsum("ni,nij,nj->n", vs, chart.metric(xs), vs))
        drift = float(np.max(np.abs(speeds - 1.0)))
        if drift < drift_tol:
            break
        step /= 2.0
    b = curvature_batch(chart, xs, with_weyl=False)
    ric = np.einsum("ni,nij,nj->n", vs, b.ricci, vs)
    s = h * np.arange(len(xs))
    fvals = None if f is None else np.asarray(f(xs), dtype=float)
    profile = GeodesicProfile(s=s, ric=ric, f=fvals) if len(xs) > 1 else None
    return GeodesicRun(profile=profile, points=xs, velocities=vs, truncated=truncated, step=h, speed_drift=drift)


CSV_FIELDS = ("R", "wplus_norm2", "wminus_norm2", "traceless_ricci_norm2", "vol_density")


def export_curvature_csv(chart: MetricChart, points, path) -> None:
    """One row per point: coordinates, R, |W+|^2, |W-|^2, |traceless Ric|^2, sqrt(det g)."""
    x, _ = _as_batch(points, chart.dim)
    b = curvature_batch(chart, x)
    coords = [f"x{i + 1}" for i in range(chart.dim)]
    columns = [b.scalar, b.wplus_norm2, b.wminus_norm2, b.traceless_ricci_norm2, b.vol_density]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(coords + list(CSV_FIELDS))
        for i in range(len(x)):
            row = list(x[i]) + [np.nan if c is None else c[i] for c in columns]
            writer.writerow([f"{val:.12g}" for val in row])
