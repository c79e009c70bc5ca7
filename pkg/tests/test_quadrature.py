from __future__ import annotations

import math

import numpy as np
import pytest

from qem import quadrature as q
from qem.errors import ParameterError
from qem.fixtures import flat_chart, product_s2_chart, sphere_chart
from qem.tensor import MetricChart, scalar_field


def ones(x):
    return np.ones(len(x))


@pytest.mark.parametrize("n", [8, 12])
def test_gauss_legendre_exact_for_polynomials(n):
    t, w = q.rule_1d(n, "gauss-legendre")
    for k in range(2 * n):
        assert np.sum(w * t**k) == pytest.approx(1 / (k + 1), rel=1e-13)


def test_midpoint_rule_weights():
    t, w = q.rule_1d(10, "uniform-midpoint")
    assert np.sum(w) == pytest.approx(1) and t[0] == pytest.approx(0.05)


def test_sphere_volume():
    quad = q.QuadratureSpec(16, compactification="hyperspherical")
    assert q.integrate(sphere_chart(), ones, quad) == pytest.approx(8 * math.pi**2 / 3, rel=1e-4)


def test_torus_volume():
    side = 2 * math.pi
    assert q.integrate(flat_chart(side), ones, q.QuadratureSpec(8)) == pytest.approx(side**4, rel=1e-13)


def test_s2xs2_scalar_integral():
    chart = product_s2_chart(1.0, 1.0)
    quad = q.QuadratureSpec(16, compactification="polar-pair")
    assert q.integrate(chart, scalar_field(chart), quad) == pytest.approx(64 * math.pi**2, rel=1e-6)


def test_tan_box_gaussian():
    chart = MetricChart(g=lambda x: np.broadcast_to(np.eye(2), (len(x), 2, 2)), dim=2)
    val = q.integrate(chart, lambda x: np.exp(-np.sum(x**2, axis=-1)), q.QuadratureSpec(64, compactification="tan-box"))
    assert val == pytest.approx(math.pi, rel=1e-6)


def test_identity_needs_truncation_on_unbounded_axes():
    chart = MetricChart(g=lambda x: np.broadcast_to(np.eye(2), (len(x), 2, 2)), dim=2)
    with pytest.raises(ParameterError, match="unbounded"):
        q.nodes(chart, q.QuadratureSpec(8))
    x, _ = q.nodes(chart, q.QuadratureSpec(8, truncation=3.0))
    assert np.all(np.abs(x) < 3)


def test_spec_validation():
    with pytest.raises(ParameterError):
        q.QuadratureSpec(4)
    with pytest.raises(ParameterError):
        q.QuadratureSpec(8, rule="simpson")
    with pytest.raises(ParameterError):
        q.QuadratureSpec(8, compactification="torus")


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("QEM_THREADS", "junk")
    assert q.thread_count() == 1
    monkeypatch.setenv("QEM_THREADS", "1")
    assert q.thread_count() == 1


def test_threaded_evaluation_is_bitwise_identical(monkeypatch):
    chart = sphere_chart()
    quad = q.QuadratureSpec(10, compactification="hyperspherical")
    field = scalar_field(chart)
    serial = q.integrate(chart, field, quad)
    monkeypatch.setattr(q, "thread_count", lambda: 4)
    threaded = q.integrate(chart, field, quad)
    assert threaded == serial


def test_chunking_preserves_order():
    x = np.arange(20.0)[:, None]
    out = q.evaluate_chunked(lambda p: {"v": p[:, 0] * 2}, x, chunk=3)
    assert np.array_equal(out["v"], 2 * x[:, 0])
