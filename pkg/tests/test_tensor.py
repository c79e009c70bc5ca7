from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qem import fd
from qem.errors import DomainError, MetricError, ParameterError
from qem.fixtures import fixture, flat_chart, product_s2_chart, sphere_chart
from qem.tensor import (MetricChart, christoffel, curvature, curvature_batch, export_curvature_csv, geodesic,
                        random_points, ricci_extremes)

BOX = tuple((-1.5, 1.5) for _ in range(4))


def fd_only(chart: MetricChart, step=1e-3) -> MetricChart:
    return MetricChart(g=chart.g, dim=chart.dim, domain=chart.domain, label=chart.label + " (fd)", fd_step=step)


def stereo_conformal(x, r=1.0):
    """``phi`` and ``dphi`` for ``g = exp(2 phi) delta`` on a stereographic 2-sphere factor."""
    s = 1 + np.sum(x**2) / r**2
    return math.log(2 / s), -2 * x / (r**2 * s)


def test_flat_christoffel_zero():
    chart = flat_chart(2 * math.pi)
    assert np.all(christoffel(chart, [1.0, 2.0, 3.0, 0.5]) == 0)


def test_sphere_christoffel_zero_at_origin():
    assert np.max(np.abs(christoffel(sphere_chart(), np.zeros(4)))) < 1e-14


def test_s2_factor_christoffel_analytic():
    p = np.array([1.0, 0.0, 0.3, -0.2])
    gam = christoffel(product_s2_chart(1.0, 1.0), p)
    want = np.zeros((4, 4, 4))
    for sl in (slice(0, 2), slice(2, 4)):
        _, dphi = stereo_conformal(p[sl])
        idx = range(sl.start, sl.stop)
        for k in idx:
            for i in idx:
                for j in idx:
                    want[k, i, j] = ((k == i) * dphi[j - sl.start] + (k == j) * dphi[i - sl.start]
                                     - (i == j) * dphi[k - sl.start])
    assert np.max(np.abs(gam - want)) < 1e-7


def test_christoffel_symmetric_and_metric_compatible():
    chart = fixture("cp2-fubini-study").chart
    p = np.array([0.3, -0.2, 0.5, 0.1])
    gam = christoffel(chart, p)
    assert np.max(np.abs(gam - np.swapaxes(gam, 1, 2))) < 1e-12
    g = chart.metric(p)[0]
    dg, _ = chart.metric_derivatives(p[None], second=False)
    # d_k g_ij = Gamma_{ki}^l g_lj + Gamma_{kj}^l g_il
    rhs = np.einsum("lki,lj->kij", gam, g) + np.einsum("lkj,il->kij", gam, g)
    assert np.max(np.abs(dg[0] - rhs)) < 1e-10


def test_point_outside_domain():
    with pytest.raises(DomainError):
        christoffel(flat_chart(1.0), [2.0, 0.5, 0.5, 0.5])


def test_non_spd_metric_rejected():
    chart = MetricChart(g=lambda x: np.broadcast_to(np.diag([1.0, 1.0, 1.0, -1.0]), (len(x), 4, 4)))
    with pytest.raises(MetricError):
        curvature(chart, np.zeros(4))


def test_unit_sphere_bundle():
    b = curvature(sphere_chart(), [0.3, -0.4, 0.2, 0.9])
    g = b.metric
    assert b.scalar == pytest.approx(12, abs=1e-9)
    assert np.max(np.abs(b.ricci - 3 * g)) < 1e-9
    assert np.max(np.abs(b.traceless_ricci)) < 1e-9
    assert np.max(np.abs(b.weyl)) < 1e-9
    assert np.max(np.abs(b.wplus_eigs)) < 1e-9 and np.max(np.abs(b.wminus_eigs)) < 1e-9


def test_flat_bundle():
    b = curvature(flat_chart(2 * math.pi), [1.0, 2.0, 3.0, 4.0])
    assert b.vol_density == pytest.approx(1.0)
    for arr in (b.christoffel, b.riemann, b.ricci, b.scalar, b.weyl, b.wplus_eigs, b.wminus_eigs):
        assert np.all(np.asarray(arr) == 0)


def product_riemann(p, r1=1.0, r2=1.0):
    """``R_ijkl = K (g_il g_jk - g_ik g_jl)`` on each factor block, zero across factors."""
    out = np.zeros((4, 4, 4, 4))
    for sl, r in ((slice(0, 2), r1), (slice(2, 4), r2)):
        phi, _ = stereo_conformal(p[sl])
        gb = r**2 * math.exp(2 * phi) * np.eye(2)
        k = 1 / r**2
        block = k * (np.einsum("il,jk->ijkl", gb, gb) - np.einsum("ik,jl->ijkl", gb, gb))
        out[sl, sl, sl, sl] = block
    return out


def test_s2xs2_against_product_oracle():
    p = np.array([0.4, -0.1, 0.7, 0.2])
    b = curvature(product_s2_chart(1.0, 1.0), p)
    assert np.max(np.abs(b.riemann - product_riemann(p))) < 1e-9
    assert b.scalar == pytest.approx(4, abs=1e-9)
    assert np.max(np.abs(b.traceless_ricci)) < 1e-9
    third = np.array([-1 / 3, -1 / 3, 2 / 3])
    assert np.allclose(b.wplus_eigs, third, atol=1e-9)
    assert np.allclose(b.wminus_eigs, third, atol=1e-9)
    assert b.weyl_norm2 == pytest.approx(4 / 3, abs=1e-6)
    assert b.scalar**2 / 24 == pytest.approx(2 / 3, abs=1e-9)


def test_s2xs2_unequal_radii_oracle():
    p = np.array([0.4, -0.1, 0.7, 0.2])
    b = curvature(product_s2_chart(1.0, 2.0), p)
    assert np.max(np.abs(b.riemann - product_riemann(p, 1.0, 2.0))) < 1e-9


def check_algebra(b, tol):
    R = b.riemann
    assert np.max(np.abs(R + R.transpose(0, 2, 1, 3, 4))) < tol
    assert np.max(np.abs(R + R.transpose(0, 1, 2, 4, 3))) < tol
    assert np.max(np.abs(R - R.transpose(0, 3, 4, 1, 2))) < tol
    bianchi = R + R.transpose(0, 1, 3, 4, 2) + R.transpose(0, 1, 4, 2, 3)
    assert np.max(np.abs(bianchi)) < tol
    ric = np.einsum("nkl,niklj->nij", b.metric_inv, R)
    assert np.max(np.abs(ric - b.ricci)) < tol
    assert np.max(np.abs(np.einsum("nij,nij->n", b.metric_inv, b.ricci) - b.scalar)) < tol
    trace = np.einsum("nik,nijkl->njl", b.metric_inv, b.weyl)
    assert np.max(np.abs(trace)) < 1e-8 * max(1.0, np.max(np.abs(R)))
    for eigs in (b.wplus_eigs, b.wminus_eigs):
        assert np.all(np.diff(eigs, axis=-1) >= 0)
        assert np.max(np.abs(eigs.sum(axis=-1))) < 1e-10 * max(1.0, np.max(np.abs(eigs)))
    assert np.allclose(b.wplus_norm2, np.sum(b.wplus_eigs**2, axis=-1), rtol=1e-10, atol=1e-12)
    assert np.allclose(b.weyl_norm2, b.wplus_norm2 + b.wminus_norm2, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("kind", ["sphere4", "s2xs2", "cp2-fubini-study", "perturbed-sphere4", "torus4"])
def test_algebraic_identities_analytic(kind):
    fx = fixture(kind, **({"eps": 0.2} if kind == "perturbed-sphere4" else {}))
    pts = random_points(fx.sample_box, 20, seed=3)
    check_algebra(curvature_batch(fx.chart, pts), 1e-7)


def test_algebraic_identities_pure_fd():
    fx = fixture("cp2-fubini-study")
    pts = random_points(BOX, 10, seed=4)
    b = curvature_batch(fd_only(fx.chart), pts)
    check_algebra(b, 1e-5)
    exact = curvature_batch(fx.chart, pts)
    assert np.max(np.abs(b.scalar - exact.scalar)) < 1e-5


def test_orientation_flip_swaps_weyl_halves():
    chart = fixture("cp2-fubini-study").chart
    p = np.array([0.2, 0.1, -0.3, 0.5])
    a, b = curvature(chart, p), curvature(chart.flipped(), p)
    assert np.allclose(a.wplus_eigs, b.wminus_eigs, atol=1e-12)
    assert np.allclose(a.wminus_eigs, b.wplus_eigs, atol=1e-12)


def test_cp2_self_dual_weyl():
    b = curvature(fixture("cp2-fubini-study").chart, [0.2, 0.1, -0.3, 0.5])
    assert np.allclose(b.wplus_eigs, [-2, -2, 4], atol=1e-8)
    assert np.max(np.abs(b.wminus_eigs)) < 1e-8
    assert b.scalar == pytest.approx(24, abs=1e-8)


def test_fd_consistency_of_supplied_derivatives():
    chart = sphere_chart()
    x = np.array([[0.3, -0.5, 0.2, 0.7]])
    exact = chart.metric_derivatives(x, second=False)[0]
    errs = [np.max(np.abs(fd.gradient(chart.metric, x, h, extrapolate=False) - exact)) for h in (2e-2, 1e-2)]
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_ricci_extremes_examples():
    pts = random_points(BOX, 30, seed=1)
    ex = ricci_extremes(sphere_chart(), pts)
    assert (ex.c, ex.C) == pytest.approx((3, 3), abs=1e-9)
    ex = ricci_extremes(product_s2_chart(1.0, 2.0), pts)
    assert (ex.c, ex.C) == pytest.approx((0.25, 1), abs=1e-6)
    box = tuple((0.5, 5.5) for _ in range(4))
    ex = ricci_extremes(flat_chart(2 * math.pi), random_points(box, 5))
    assert (ex.c, ex.C) == (0, 0)
    with pytest.raises(ParameterError):
        ricci_extremes(sphere_chart(), np.zeros((0, 4)))


def test_geodesic_flat_straight_line():
    run = geodesic(flat_chart(10.0), [1.0, 1.0, 1.0, 1.0], [1.0, 2.0, 0.0, 0.0], 3.0, 0.1)
    direction = np.array([1.0, 2.0, 0, 0]) / math.sqrt(5)
    assert np.allclose(run.points[-1], np.array([1.0, 1.0, 1.0, 1.0]) + 3 * direction, atol=1e-12)
    assert np.all(run.profile.ric == 0)
    assert not run.truncated


def test_geodesic_sphere_great_circle():
    start = np.array([1.0, 0.0, 0.0, 0.0])
    run = geodesic(sphere_chart(), start, [0.0, 1.0, 0.0, 0.0], 2 * math.pi, 0.01)
    assert not run.truncated
    assert run.profile.L == pytest.approx(2 * math.pi)
    assert np.max(np.abs(run.points[-1] - start)) < 1e-5
    assert np.max(np.abs(run.profile.ric - 3)) < 1e-6
    assert run.speed_drift < 1e-6


def test_geodesic_truncates_at_domain_edge():
    run = geodesic(flat_chart(1.0), [0.5, 0.5, 0.5, 0.5], [1.0, 0, 0, 0], 2.0, 0.05)
    assert run.truncated and run.points[-1][0] < 1.0
    with pytest.raises(ParameterError):
        geodesic(flat_chart(1.0), [0.5] * 4, [1, 0, 0, 0], 1.0, 0.0)


def test_export_curvature_csv(tmp_path):
    path = tmp_path / "c.csv"
    export_curvature_csv(sphere_chart(), random_points(BOX, 3), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x1,x2,x3,x4,R,wplus_norm2,wminus_norm2,traceless_ricci_norm2,vol_density"
    assert len(lines) == 4
    assert float(lines[1].split(",")[4]) == pytest.approx(12, abs=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 3.0), st.lists(st.floats(-1.5, 1.5), min_size=4, max_size=4))
def test_sphere_radius_scaling(r, p):
    b = curvature(sphere_chart(r), np.array(p))
    assert b.scalar == pytest.approx(12 / r**2, rel=1e-8)
