"""Acceptance criteria; each test prints one ``criterion N: PASS|FAIL`` line."""

from __future__ import annotations

import contextlib
import math
import time

import mpmath as mp
import numpy as np
import pytest

from conftest import cached_fixture, cached_report
from qem import bounds as bd
from qem import comparison as cmp
from qem.fixtures import product_s2_chart
from qem.qe import constant_potential, curvature_identity_residuals, u_identity_residual
from qem.tensor import curvature_batch, random_points, ricci_extremes
from qem.topology import euler_identity_check, euler_identity_rhs, topology_report

PI2 = math.pi**2
VOL_S4 = 8 * PI2 / 3
M_SAMPLES = (1.001, 1.5, 2.0, 3.0, 5.0, 10.0, 100.0, 1e4, 1e6, math.inf)
FIXTURES = ("sphere4", "torus4", "s2xs2", "cp2-fubini-study")
EXPECTED_CHI = {"sphere4": 2, "torus4": 0, "s2xs2": 4, "cp2-fubini-study": 3}
EXPECTED_TAU = {"sphere4": 0, "torus4": 0, "s2xs2": 0, "cp2-fubini-study": 1}


@pytest.fixture
def criterion(capsys):
    @contextlib.contextmanager
    def scope(number: int, title: str):
        ok = False
        try:
            yield
            ok = True
        finally:
            with capsys.disabled():
                print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({title})")
    return scope


def test_criterion_01_gauss_bonnet_chern(criterion):
    with criterion(1, "Euler characteristic by quadrature"):
        start = time.perf_counter()
        for kind in FIXTURES:
            fx = cached_fixture(kind)
            rep = topology_report(fx.chart, fx.quad, fx.qe)
            assert abs(rep.chi_hat - EXPECTED_CHI[kind]) <= 1e-3, (kind, rep.chi_hat)
        assert time.perf_counter() - start <= 300


def test_criterion_02_hirzebruch(criterion):
    with criterion(2, "signature by quadrature and orientation flip"):
        for kind in FIXTURES:
            tol = 5e-3 if kind == "cp2-fubini-study" else 1e-3
            tau = cached_report(kind).tau_hat
            assert abs(tau - EXPECTED_TAU[kind]) <= tol, (kind, tau)
        for kind in ("cp2-fubini-study", "s2xs2"):
            assert cached_report(kind, flipped=True).tau_hat == -cached_report(kind).tau_hat


def test_criterion_03_euler_identity_equality(criterion):
    with criterion(3, "Euler identities on the round sphere"):
        closed = {"wplus_norm2": 0.0, "wminus_norm2": 0.0, "grad_f_norm2": 0.0, "R_grad_f_norm2": 0.0,
                  "R2": 144 * VOL_S4, "dR_grad_f": 0.0, "vol": VOL_S4}
        target = 16 * PI2
        rep = cached_report("sphere4")
        fx = cached_fixture("sphere4")
        for m in (1.5, 2, 5, 10):
            scal, grad = euler_identity_rhs(closed, m, 3.0)
            assert abs(scal - target) <= 1e-6 * target and abs(grad - target) <= 1e-6 * target
            res = euler_identity_check(fx.chart, constant_potential(m, 3.0), fx.quad, report=rep)
            assert abs(res.rhs_scal - target) <= 1e-3 * target
            assert abs(res.rhs_grad - target) <= 1e-3 * target


def test_criterion_04_volume_yamabe_equality(criterion):
    with criterion(4, "volume and Yamabe equality case"):
        for m in M_SAMPLES:
            vb = bd.volume_bound(bd.BoundsInput(m, 3.0))
            assert abs(vb.max_vol - VOL_S4) <= 1e-10 * VOL_S4, m
            yb = bd.yamabe_bound(bd.BoundsInput(m, 3.0, vol=VOL_S4))
            assert abs(yb.value - 384 * PI2) <= 1e-10 * 384 * PI2, m


def test_criterion_05_defect_equality(criterion):
    with criterion(5, "Euler-characteristic bound equality case"):
        for m in M_SAMPLES:
            value = bd.ht_defect_lower(bd.BoundsInput(m, 3.0, vol=VOL_S4)).value
            assert abs(value - 8 * PI2 * 2) <= 1e-10 * 16 * PI2, m


def test_criterion_06_scalar_integral_criterion(criterion):
    with criterion(6, "integral scalar-curvature criterion both ways"):
        rep = cached_report("sphere4")
        for m in M_SAMPLES:
            inp = bd.BoundsInput(m, 3.0, vol=VOL_S4)
            assert bd.scalar_integral_criterion(144 * VOL_S4, inp).passed
            assert bd.scalar_integral_criterion(rep.integrals["R2"], bd.BoundsInput(m, 3.0, vol=rep.integrals["vol"])).passed
            over = 1.01 * bd.scalar_integral_factor(m) * 9 * VOL_S4
            assert not bd.scalar_integral_criterion(over, inp).passed
        assert not bd.scalar_integral_criterion(200 * VOL_S4, bd.BoundsInput(2, 3.0, vol=VOL_S4)).passed


def test_criterion_07_comparison_ode(criterion):
    with criterion(7, "comparison ODE oracles, envelopes and Wronskian"):
        m, lam, c, C = 2.0, 1.0, 0.0, 2.0
        K, H = (lam - c) / m, (C - lam) / m
        L = 0.9 * math.pi / (2 * math.sqrt(K))
        lo = cmp.integrate_u(cmp.synthetic_profile("constant", L, 201, c, C, value=c), m, lam)
        hi = cmp.integrate_u(cmp.synthetic_profile("constant", L, 201, c, C, value=C), m, lam)
        assert np.max(np.abs(lo.u - np.cos(math.sqrt(K) * lo.s))) <= 1e-8
        assert np.max(np.abs(hi.u - np.cosh(math.sqrt(H) * hi.s))) <= 1e-8
        assert abs(cmp.cosine_envelope_check(lo, K, c).margin) <= 1e-8
        assert abs(cmp.cosh_envelope_check(hi, H, C).margin) <= 1e-8
        inner = cmp.integrate_u(cmp.synthetic_profile("oscillating", L, 201, 0.2, 1.8), m, lam)
        assert cmp.cosine_envelope_check(inner, K, c).end_margin > 0
        assert cmp.cosh_envelope_check(inner, H, C).end_margin > 0
        rng = np.random.default_rng(20240607)
        for _ in range(50):
            sol = cmp.integrate_u(cmp.random_admissible_profile(rng, L, c, C), m, lam)
            v = np.cos(math.sqrt(K) * sol.s)
            dv = -math.sqrt(K) * np.sin(math.sqrt(K) * sol.s)
            assert cmp.wronskian_monotonicity(sol.s, sol.u, v, sol.du, dv).passed


def test_criterion_08_mixed_root(criterion):
    with criterion(8, "mixed-threshold root"):
        inp = bd.BoundsInput(2.0, 1.0, c=0.0, C=2.0)
        th = bd.ht_thresholds(inp)
        assert abs(th.root_residual) <= 1e-10
        assert bd.mixed_profile_monotone(inp)
        mp.mp.dps = 40
        a = b = mp.sqrt(mp.mpf(1) / 2)
        x0 = mp.findroot(lambda x: mp.cosh(b * x) / mp.cos(a * x) - mp.root(6, 4), 0.9)
        golden = 0.9423090607566422
        assert abs(float(x0) - golden) <= 1e-15
        assert abs(th.x0 - golden) <= 1e-10


def test_criterion_09_soliton_limits(criterion):
    with criterion(9, "soliton limits at m = 1e6"):
        assert abs(bd.osc_bound(1e6) - math.log(5)) <= 1e-5
        th = bd.ht_thresholds(bd.BoundsInput(1e6, 1.0, c=0.0, C=2.0))
        lim = bd.soliton_limits(1.0, 0.0, 2.0)
        for got, key in zip(th.as_tuple(), ("t1", "t2", "t3")):
            assert abs(got - lim[key]) <= 1e-3 * lim[key]


def test_criterion_10_curvature_properties(criterion):
    with criterion(10, "curvature property suite"):
        kinds = (("sphere4", {}), ("torus4", {}), ("s2xs2", {}), ("cp2-fubini-study", {}),
                 ("perturbed-sphere4", {"eps": 0.2}))
        for kind, params in kinds:
            fx = cached_fixture(kind, **params)
            b = curvature_batch(fx.chart, random_points(fx.sample_box, 100, seed=10))
            R = b.riemann
            for perm, sign in (((0, 2, 1, 3, 4), -1), ((0, 1, 2, 4, 3), -1), ((0, 3, 4, 1, 2), 1)):
                assert np.max(np.abs(R - sign * R.transpose(perm))) <= 1e-7, kind
            bianchi = R + R.transpose(0, 1, 3, 4, 2) + R.transpose(0, 1, 4, 2, 3)
            assert np.max(np.abs(bianchi)) <= 1e-7, kind
            assert np.max(np.abs(np.einsum("nik,nijkl->njl", b.metric_inv, b.weyl))) <= 1e-8, kind
            for eigs in (b.wplus_eigs, b.wminus_eigs):
                assert np.max(np.abs(eigs.sum(axis=-1))) <= 1e-10, kind
            assert np.max(np.abs(b.weyl_norm2 - b.wplus_norm2 - b.wminus_norm2)) <= 1e-10, kind
        ex = ricci_extremes(product_s2_chart(1.0, 2.0), random_points(((-1.5, 1.5),) * 4, 100, seed=10))
        assert abs(ex.c - 0.25) <= 1e-6 and abs(ex.C - 1.0) <= 1e-6


def test_criterion_11_identity_gates(criterion):
    with criterion(11, "identity gates and lambda detection"):
        m = 2.0
        for kind in ("sphere4", "s2xs2", "cp2-fubini-study", "torus4"):
            fx = cached_fixture(kind)
            lam = fx.value("lambda")
            pts = random_points(fx.sample_box, 100, seed=11)
            good = constant_potential(m, lam)
            for r in curvature_identity_residuals(fx.chart, good, pts):
                assert np.max(np.abs(r)) <= 1e-6, kind
            assert np.max(np.abs(u_identity_residual(fx.chart, good, pts))) <= 1e-6, kind
            bad = constant_potential(m, lam + 0.1)
            r1, _, r3 = curvature_identity_residuals(fx.chart, bad, pts)
            assert np.min(np.abs(r1)) >= 0.1 and np.min(np.abs(r3)) >= 0.1, kind
            assert np.min(np.abs(u_identity_residual(fx.chart, bad, pts))) >= 0.1, kind
