"""Tensor-product quadrature over compactified charts.

A compactification maps a bounded box of quadrature coordinates onto the
chart (minus a measure-zero set), so closed manifolds covered by one
stereographic or affine chart can be integrated without an atlas.

Reductions collect every weighted node value into one array before a single
``numpy.sum`` (pairwise summation), so results do not depend on chunking or
on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ParameterError
from .tensor import MetricChart

RULES = ("gauss-legendre", "uniform-midpoint")
COMPACTIFICATIONS = ("identity", "hyperspherical", "polar-pair", "tan-box")

CHUNK = 2048


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor-product rule: ``nodes_per_axis`` nodes of ``rule`` on each box axis.

    ``truncation`` bounds unbounded axes of an ``identity`` substitution to
    ``[-truncation, truncation]``.
    """

    nodes_per_axis: int = 16
    rule: str = "gauss-legendre"
    compactification: str = "identity"
    truncation: Optional[float] = None

    def __post_init__(self):
        if self.nodes_per_axis < 8:
            raise ParameterError(f"nodes_per_axis must be >= 8, got {self.nodes_per_axis}")
        if self.rule not in RULES:
            raise ParameterError(f"unknown quadrature rule {self.rule!r}; choose from {RULES}")
        if self.compactification not in COMPACTIFICATIONS:
            raise ParameterError(f"unknown compactification {self.compactification!r}; choose from {COMPACTIFICATIONS}")

    def with_nodes(self, nodes: int) -> "QuadratureSpec":
        return QuadratureSpec(nodes, self.rule, self.compactification, self.truncation)


def rule_1d(n: int, rule: str) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on ``(0, 1)``."""
    if rule == "gauss-legendre":
        t, w = np.polynomial.legendre.leggauss(n)
        return 0.5 * (t + 1.0), 0.5 * w
    return (np.arange(n) + 0.5) / n, np.full(n, 1.0 / n)


def _box_rule(lo, hi, n: int, rule: str) -> tuple[np.ndarray, np.ndarray]:
    t, w = rule_1d(n, rule)
    axes = [a + (b - a) * t for a, b in zip(lo, hi)]
    weights = [(b - a) * w for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    wmesh = np.meshgrid(*weights, indexing="ij")
    y = np.stack([m.ravel() for m in mesh], axis=-1)
    return y, np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)


def _radius(y):
    # r = tan(pi y / 2) maps (0, 1) onto (0, inf)
    return np.tan(0.5 * math.pi * y), 0.5 * math.pi / np.cos(0.5 * math.pi * y) ** 2


def nodes(chart: MetricChart, quad: QuadratureSpec, per_axis: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Chart points and coordinate weights (Jacobian included, volume density excluded).

    ``per_axis`` overrides the node count (used for coarse error estimates).
    """
    n, kind = per_axis or quad.nodes_per_axis, quad.compactification
    dim = chart.dim
    if kind == "identity":
        lo, hi = chart.lower.copy(), chart.upper.copy()
        for i in range(dim):
            if not (math.isfinite(lo[i]) and math.isfinite(hi[i])):
                if quad.truncation is None:
                    raise ParameterError(f"axis {i} of chart {chart.label!r} is unbounded; give a truncation or a compactification")
                lo[i], hi[i] = max(lo[i], -quad.truncation), min(hi[i], quad.truncation)
        x, w = _box_rule(lo, hi, n, quad.rule)
    elif kind == "tan-box":
        y, w = _box_rule(np.zeros(dim), np.ones(dim), n, quad.rule)
        x = np.tan(math.pi * (y - 0.5))
        w = w * np.prod(math.pi / np.cos(math.pi * (y - 0.5)) ** 2, axis=-1)
    elif kind == "hyperspherical":
        if dim != 4:
            raise ParameterError("hyperspherical compactification is for 4-dimensional charts")
        y, w = _box_rule([0, 0, 0, 0], [1, math.pi, math.pi, 2 * math.pi], n, quad.rule)
        r, dr = _radius(y[:, 0])
        p1, p2, ph = y[:, 1], y[:, 2], y[:, 3]
        x = np.stack([r * np.cos(p1), r * np.sin(p1) * np.cos(p2),
                      r * np.sin(p1) * np.sin(p2) * np.cos(ph), r * np.sin(p1) * np.sin(p2) * np.sin(ph)], axis=-1)
        w = w * dr * r**3 * np.sin(p1) ** 2 * np.sin(p2)
    else:  # polar-pair
        if dim != 4:
            raise ParameterError("polar-pair compactification is for 4-dimensional product charts")
        y, w = _box_rule([0, 0, 0, 0], [1, 2 * math.pi, 1, 2 * math.pi], n, quad.rule)
        r1, dr1 = _radius(y[:, 0])
        r2, dr2 = _radius(y[:, 2])
        x = np.stack([r1 * np.cos(y[:, 1]), r1 * np.sin(y[:, 1]), r2 * np.cos(y[:, 3]), r2 * np.sin(y[:, 3])], axis=-1)
        w = w * dr1 * r1 * dr2 * r2
    inside = chart.contains(x)
    if not np.all(inside):
        raise DomainError(f"{np.count_nonzero(~inside)} quadrature nodes fall outside chart {chart.label!r}")
    return x, w


def thread_count() -> int:
    """Worker threads for node evaluation, capped by ``QEM_THREADS``."""
    try:
        cap = int(os.environ.get("QEM_THREADS", "1"))
    except ValueError:
        cap = 1
    return max(1, min(cap, os.cpu_count() or 1))


def evaluate_chunked(func: Callable[[np.ndarray], dict], x: np.ndarray, chunk: int = CHUNK) -> dict:
    """Apply ``func`` (points -> dict of per-point arrays) chunk by chunk, preserving order."""
    slices = [slice(i, min(i + chunk, len(x))) for i in range(0, len(x), chunk)]
    workers = thread_count()
    if workers > 1 and len(slices) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda sl: func(x[sl]), slices))
    else:
        parts = [func(x[sl]) for sl in slices]
    return {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}


def weighted_sum(weights: np.ndarray, values: np.ndarray) -> float:
    return float(np.sum(weights * values))


def integrate(chart: MetricChart, field: Callable[[np.ndarray], np.ndarray], quad: QuadratureSpec) -> float:
    """``int field dV_g`` using ``sqrt(det g)`` and the compactification Jacobian."""
    x, w = nodes(chart, quad)

    def evaluate(points):
        g = chart.metric(points)
        return {"value": np.asarray(field(points), dtype=float) * np.sqrt(np.linalg.det(g))}

    return weighted_sum(w, evaluate_chunked(evaluate, x)["value"])
