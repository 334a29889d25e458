"""Independent brute-force references used by the tests.

Nothing here calls into the solvers under test; each oracle enumerates a
grid directly with numpy.
"""

from __future__ import annotations

import itertools

import numpy as np


def simplex_grid(n: int, steps: int) -> np.ndarray:
    """All weight vectors on the unit simplex with spacing ``1 / steps``."""
    if n == 1:
        return np.ones((1, 1))
    head = np.array(
        [c for c in itertools.product(range(steps + 1), repeat=n - 1) if sum(c) <= steps],
        dtype=float,
    ).reshape(-1, n - 1)
    return np.column_stack([head, steps - head.sum(axis=1)]) / steps


def grid_min_variance(cov: np.ndarray, mean: np.ndarray, mu_p: float, grid: np.ndarray) -> float:
    """Smallest variance over grid points whose return reaches ``mu_p``."""
    ok = grid @ mean >= mu_p - 1e-15
    g = grid[ok]
    return float(np.einsum("ij,jk,ik->i", g, cov, g).min())


def pair_grid_optimum(cov, mean, lam, epsilon=0.0, delta=1.0, steps=1000):
    """Exact minimum of the scalarised objective over every 2-asset portfolio on a weight grid."""
    w1 = np.arange(steps + 1) / steps
    w2 = 1.0 - w1
    ok = (w1 >= epsilon - 1e-12) & (w1 <= delta + 1e-12) & (w2 >= epsilon - 1e-12) & (w2 <= delta + 1e-12)
    w1, w2 = w1[ok], w2[ok]
    best = np.inf
    for i, j in itertools.combinations(range(len(mean)), 2):
        risk = w1 ** 2 * cov[i, i] + 2 * w1 * w2 * cov[i, j] + w2 ** 2 * cov[j, j]
        ret = w1 * mean[i] + w2 * mean[j]
        best = min(best, float((lam * risk - (1 - lam) * ret).min()))
    return best


def segment_interp(x0, y0, x1, y1, x):
    """Straight-line value through two points, by similar triangles."""
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
