"""Quadrature rules on the reference n-simplex.

Rules are conical (Stroud) products of Gauss-Jacobi lines: an order-q rule
uses q points per axis and integrates polynomials of total degree 2q-1
exactly over the simplex {l_i >= 0, sum l_i <= 1}.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=64)
def simplex_rule(dim: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating f(l_1..l_dim) over the reference simplex.

    Returns (points, weights) with points of shape (q^dim, dim); weights sum
    to 1/dim! (the simplex volume).
    """
    if dim < 1:
        raise ValueError("simplex dimension must be >= 1")
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    lines = []
    for axis in range(dim):
        alpha = dim - 1 - axis
        x, w = roots_jacobi(order, alpha, 0.0)
        t = 0.5 * (x + 1.0)
        wt = w / 2.0 ** (alpha + 1)
        lines.append((t, wt))

    pts = np.zeros((1, dim))
    wts = np.ones(1)
    remaining = np.ones(1)
    for axis, (t, wt) in enumerate(lines):
        k = len(t)
        m = pts.shape[0]
        new_pts = np.repeat(pts, k, axis=0)
        new_wts = np.repeat(wts, k) * np.tile(wt, m)
        new_rem = np.repeat(remaining, k)
        coord = np.tile(t, m) * new_rem
        new_pts[:, axis] = coord
        remaining = new_rem - coord
        pts, wts = new_pts, new_wts
    return pts, wts


def barycentric(points: np.ndarray) -> np.ndarray:
    """Append the l_0 = 1 - sum(l_i) coordinate, giving shape (K, dim+1)."""
    l0 = 1.0 - points.sum(axis=1, keepdims=True)
    return np.hstack([l0, points])
