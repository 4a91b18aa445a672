"""Small numerical helpers: finite-difference stencils, fits, Gauss rules."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def central_stencil(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of a second-order accurate central difference.

    Returns (offsets, weights) with sum_k w_k f(x + o_k h) ~ h^order f^(order)(x).
    """
    if order == 0:
        return np.array([0.0]), np.array([1.0])
    half = (order + 1) // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    m = offsets.size
    vander = np.vander(offsets, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    weights = np.linalg.solve(vander, rhs)
    return offsets, weights


def slope(x, y) -> float:
    """Least-squares slope of y against x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(x, y, 1)[0])


def log2_slope(j, values) -> float:
    return slope(j, np.log2(np.asarray(values, dtype=float)))


@lru_cache(maxsize=None)
def gauss_legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def panel_rule(lo: float, hi: float, panel: float, nodes: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [lo, hi] with panels of length <= panel."""
    count = max(1, int(np.ceil((hi - lo) / panel)))
    edges = np.linspace(lo, hi, count + 1)
    t, w = gauss_legendre(nodes)
    width = np.diff(edges)
    x = (edges[:-1, None] + width[:, None] * t[None, :]).ravel()
    wt = (width[:, None] * w[None, :]).ravel()
    return x, wt
