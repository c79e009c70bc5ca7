"""Central finite differences with one level of Richardson extrapolation.

All routines act on batched fields: ``func`` maps an ``(N, n)`` array of points
to an ``(N, *shape)`` array, and derivative axes are inserted right after the
batch axis.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

Field = Callable[[np.ndarray], np.ndarray]


def richardson(coarse, fine, order: int = 2, ratio: float = 2.0):
    """Combine two estimates with step ratio ``ratio`` whose error is O(h**order)."""
    factor = ratio**order
    return (factor * np.asarray(fine) - np.asarray(coarse)) / (factor - 1.0)


def _eval_offsets(func: Field, x: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    # offsets: (K, n); returns (N, K, *shape)
    n_pts, dim = x.shape
    pts = x[:, None, :] + offsets[None, :, :]
    vals = np.asarray(func(pts.reshape(-1, dim)))
    return vals.reshape((n_pts, len(offsets)) + vals.shape[1:])


def _gradient_once(func: Field, x: np.ndarray, h: float) -> np.ndarray:
    dim = x.shape[1]
    eye = np.eye(dim)
    vals = _eval_offsets(func, x, np.concatenate([h * eye, -h * eye]))
    return (vals[:, :dim] - vals[:, dim:]) / (2.0 * h)


def gradient(func: Field, x: np.ndarray, h: float, extrapolate: bool = True) -> np.ndarray:
    """First derivatives, ``out[:, k, ...] = d func / d x_k``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    coarse = _gradient_once(func, x, h)
    if not extrapolate:
        return coarse
    return richardson(coarse, _gradient_once(func, x, h / 2.0))


def _hessian_offsets(dim: int) -> tuple[np.ndarray, list[tuple[int, int]]]:
    eye = np.eye(dim)
    offsets = [np.zeros(dim)]
    for k in range(dim):
        offsets += [eye[k], -eye[k]]
    pairs = [(k, l) for k in range(dim) for l in range(k + 1, dim)]
    for k, l in pairs:
        offsets += [eye[k] + eye[l], eye[k] - eye[l], -eye[k] + eye[l], -eye[k] - eye[l]]
    return np.array(offsets), pairs


def _hessian_once(func: Field, x: np.ndarray, h: float) -> np.ndarray:
    dim = x.shape[1]
    offsets, pairs = _hessian_offsets(dim)
    vals = _eval_offsets(func, x, h * offsets)
    center = vals[:, 0]
    out = np.empty((x.shape[0], dim, dim) + vals.shape[2:])
    for k in range(dim):
        out[:, k, k] = (vals[:, 1 + 2 * k] - 2.0 * center + vals[:, 2 + 2 * k]) / h**2
    base = 1 + 2 * dim
    for idx, (k, l) in enumerate(pairs):
        pp, pm, mp, mm = (vals[:, base + 4 * idx + j] for j in range(4))
        out[:, k, l] = out[:, l, k] = (pp - pm - mp + mm) / (4.0 * h**2)
    return out


def hessian(func: Field, x: np.ndarray, h: float, extrapolate: bool = True) -> np.ndarray:
    """Second derivatives, ``out[:, k, l, ...] = d^2 func / d x_k d x_l``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    coarse = _hessian_once(func, x, h)
    if not extrapolate:
        return coarse
    return richardson(coarse, _hessian_once(func, x, h / 2.0))


def directional(func: Field, x: np.ndarray, direction: np.ndarray, h: float) -> np.ndarray:
    """Derivative of a scalar field along per-point vectors ``direction`` (N, n)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    direction = np.atleast_2d(direction)

    def once(step):
        both = np.concatenate([x + step * direction, x - step * direction])
        vals = np.asarray(func(both))
        n_pts = x.shape[0]
        return (vals[:n_pts] - vals[n_pts:]) / (2.0 * step)

    return richardson(once(h), once(h / 2.0))
