"""
Helpers shared by the projection baselines
"""
from typing import Tuple

import numpy as np

from harness.trajectory import NormStats

GRID_MARGIN = 1.1


def fit_scale(codes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Center and half-extent that map every code into [-1, 1]^2 with a 10% margin"""
    lo, hi = codes.min(axis=0), codes.max(axis=0)
    center = 0.5 * (lo + hi)
    half = GRID_MARGIN * 0.5 * (hi - lo)
    return center, half


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    sq = np.sum(a ** 2, axis=1)[:, None] - 2.0 * a @ b.T + np.sum(b ** 2, axis=1)[None, :]
    return np.maximum(sq, 0.0)


def median_gamma(points: np.ndarray) -> float:
    """RBF gamma = 1 / (2 median^2) of the pairwise distances; 0 when all points coincide"""
    upper = np.triu_indices(points.shape[0], k=1)
    distances = np.sqrt(pairwise_sq_dists(points, points)[upper])
    median = float(np.median(distances)) if distances.size else 0.0
    if median <= 0.0:
        positive = distances[distances > 0]
        if not positive.size:
            return 0.0
        median = float(np.median(positive))
    return 1.0 / (2.0 * median ** 2)


def norm_header(stats: NormStats) -> list:
    return np.flatnonzero(stats.floored).tolist()


def norm_from_arrays(mean: np.ndarray, std: np.ndarray, floored_indices) -> NormStats:
    floored = np.zeros(std.shape, dtype=bool)
    floored[list(floored_indices)] = True
    return NormStats(mean, std, floored)
