from __future__ import annotations

import math

import numpy as np
import pytest

from qem import topology as t
from qem.bounds import BoundsInput, scalar_integral_criterion
from qem.errors import HypothesisViolation, ParameterError
from qem.fixtures import fixture
from qem.quadrature import QuadratureSpec
from qem.qe import constant_potential

PI2 = math.pi**2
VOL_S4 = 8 * PI2 / 3

EXPECTED = {
    "sphere4": (2, 0),
    "torus4": (0, 0),
    "s2xs2": (4, 0),
    "cp2-fubini-study": (3, 1),
}


@pytest.mark.parametrize("kind", list(EXPECTED))
def test_chi_tau_on_fixtures(report, kind):
    rep = report(kind)
    chi, tau = EXPECTED[kind]
    assert abs(rep.chi_hat - chi) <= 1e-3
    assert abs(rep.tau_hat - tau) <= (5e-3 if kind == "cp2-fubini-study" else 1e-3)
    assert abs(rep.chi_hat - round(rep.chi_hat)) <= 1e-3
    assert rep.route_gap <= 1e-9
    assert rep.chi_err is not None and rep.chi_err >= t.ERROR_FLOOR


def test_tighter_examples(report):
    assert abs(report("torus4").chi_hat) <= 1e-9
    assert abs(report("sphere4").tau_hat) <= 1e-9
    assert abs(report("s2xs2").tau_hat) <= 1e-6


@pytest.mark.parametrize("kind,hp,hm", [("sphere4", 4, 4), ("cp2-fubini-study", 9, 3), ("torus4", 0, 0)])
def test_ht_examples(report, kind, hp, hm):
    rep = report(kind)
    assert rep.ht_plus == pytest.approx(hp, abs=1e-2)
    assert rep.ht_minus == pytest.approx(hm, abs=1e-2)
    assert rep.ht_pass


def test_ht_verdict_tolerance():
    assert t.ht_verdict(0.0, -1e-9)
    assert not t.ht_verdict(1.0, -0.1)


def test_orientation_flip(report):
    a, b = report("cp2-fubini-study"), report("cp2-fubini-study", flipped=True)
    assert b.tau_hat == -a.tau_hat
    assert b.chi_hat == a.chi_hat
    assert np.array_equal(a.fields.values["wplus_norm2"], b.fields.values["wminus_norm2"])


def test_perturbed_sphere_topology(report):
    rep = report("perturbed-sphere4")
    assert rep.chi_hat == pytest.approx(2, abs=1e-3)
    assert rep.tau_hat == pytest.approx(0, abs=1e-3)


def test_quadrature_convergence_within_reported_error(report):
    fine = report("sphere4")
    fx = fixture("sphere4")
    coarse = t.topology_report(fx.chart, fx.quad.with_nodes(8))
    assert abs(fine.chi_hat - coarse.chi_hat) < 10 * coarse.chi_err
    assert fine.chi_err < coarse.chi_err


def test_wrapper_functions_agree(report):
    fx = fixture("torus4")
    rep = report("torus4")
    assert t.gauss_bonnet_chern(fx.chart, fx.quad) == rep.chi_hat
    assert t.hirzebruch(fx.chart, fx.quad) == rep.tau_hat
    hp, hm, ok = t.ht_check(fx.chart, fx.quad)
    assert (hp, hm, ok) == (rep.ht_plus, rep.ht_minus, True)


def test_sphere_volume_and_curvature_integrals(report):
    i = report("sphere4").integrals
    assert i["vol"] == pytest.approx(VOL_S4, rel=1e-6)
    assert i["R2"] == pytest.approx(144 * VOL_S4, rel=1e-6)


def sphere_integrals():
    return {"wplus_norm2": 0.0, "wminus_norm2": 0.0, "grad_f_norm2": 0.0, "R_grad_f_norm2": 0.0,
            "R2": 144 * VOL_S4, "dR_grad_f": 0.0, "vol": VOL_S4}


@pytest.mark.parametrize("m", [1.5, 2, 5, 10, math.inf])
def test_euler_identities_closed_form_equality(m):
    scal, grad = t.euler_identity_rhs(sphere_integrals(), m, 3.0)
    assert scal == pytest.approx(16 * PI2, rel=1e-12)
    assert grad == pytest.approx(16 * PI2, rel=1e-12)


def test_euler_identities_arithmetic_chain():
    # -(m+2)/(12(m-1)) * 144 + 2(m+1)/(m-1) * 9 = 6 at m = 2 and m = 5
    for m in (2, 5):
        assert -(m + 2) / (12 * (m - 1)) * 144 + 2 * (m + 1) / (m - 1) * 9 == pytest.approx(6)


@pytest.mark.parametrize("m", [1.5, 2, 5, 10])
def test_euler_identities_quadrature(report, m):
    fx = fixture("sphere4", m=m)
    res = t.euler_identity_check(fx.chart, fx.qe, fx.quad, report=report("sphere4"))
    assert res.passed(1e-3)
    assert res.lhs == pytest.approx(16 * PI2, rel=1e-3)


def test_euler_identities_cp2(report):
    fx = fixture("cp2-fubini-study")
    res = t.euler_identity_check(fx.chart, fx.qe, fx.quad, report=report("cp2-fubini-study"))
    assert res.passed(1e-3)
    assert res.gate_residual <= 1e-6


def test_euler_identities_gate_rejects_non_qe(report):
    fx = fixture("sphere4")
    with pytest.raises(HypothesisViolation, match="not quasi-Einstein"):
        t.euler_identity_check(fx.chart, constant_potential(2, 2.5), fx.quad, report=report("sphere4"))


def test_euler_identities_flat_vacuous(report):
    fx = fixture("torus4")
    res = t.euler_identity_check(fx.chart, fx.qe, fx.quad, report=report("torus4"))
    assert res.lhs == 0 and res.rhs_scal == 0 and res.rhs_grad == 0
    with pytest.raises(ParameterError):
        t.euler_identity_rhs(sphere_integrals(), 1.0, 3.0)


def test_gursky_sphere(report):
    res = t.gursky_check(None, None, report=report("sphere4"))
    assert res.passed and abs(res.lower) < 1e-6 and res.wplus_integral < 1e-12


def test_gursky_s2xs2_first_inequality_fails(report):
    rep = report("s2xs2")
    res = t.gursky_check(None, None, assert_first=False, report=rep)
    assert res.lower == pytest.approx(16 * PI2, rel=1e-3)
    assert res.wplus_integral == pytest.approx(32 * PI2 / 3, rel=1e-3)
    assert not res.first_holds and res.second_holds and res.passed and res.note
    assert not t.gursky_check(None, None, report=rep).passed


def test_gursky_cp2(report):
    res = t.gursky_check(None, None, report=report("cp2-fubini-study"))
    assert res.first_holds and res.passed
    assert res.wplus_integral >= 8 * PI2


def test_gursky_needs_positive_scalar(report):
    with pytest.raises(HypothesisViolation):
        t.gursky_check(None, None, report=report("torus4"))


@pytest.mark.parametrize("kind,value", [("sphere4", 384 * PI2), ("torus4", 0.0), ("s2xs2", 256 * PI2)])
def test_yamabe_integral(report, kind, value):
    res = t.yamabe_integral_check(None, None, rtol=1e-3, report=report(kind))
    assert res.value == pytest.approx(value, rel=1e-4, abs=1e-9)
    assert res.passed


def test_scalar_integral_on_sphere(report):
    fx = fixture("sphere4")
    res = t.scalar_integral_on_chart(fx.chart, fx.qe, fx.quad, report=report("sphere4"))
    assert res.passed
    synthetic = scalar_integral_criterion(200 * VOL_S4, BoundsInput(2, 3, vol=VOL_S4))
    assert not synthetic.passed


def test_export_integrand_csv(tmp_path):
    fx = fixture("torus4")
    nf = t.evaluate_fields(fx.chart, QuadratureSpec(8), fx.qe)
    path = tmp_path / "i.csv"
    t.export_integrand_csv(nf, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 8**4 + 1
    assert lines[0].startswith("x1,x2,x3,x4,weight,R")
