from __future__ import annotations

import functools

import pytest

from qem.fixtures import fixture
from qem.topology import topology_report


@functools.lru_cache(maxsize=None)
def cached_fixture(kind: str, **params):
    return fixture(kind, **params)


@functools.lru_cache(maxsize=None)
def cached_report(kind: str, flipped: bool = False):
    """Default-resolution topology report, shared across test modules."""
    fx = cached_fixture(kind)
    chart = fx.chart.flipped() if flipped else fx.chart
    return topology_report(chart, fx.quad, fx.qe)


@pytest.fixture(scope="session")
def report():
    return cached_report


@pytest.fixture(scope="session")
def fix():
    return cached_fixture
