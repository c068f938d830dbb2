"""
Linear centered kernel alignment between two activation matrices
"""
import logging
from typing import NamedTuple

import numpy as np

from errors import ShapeError

logger = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-12


class CkaResult(NamedTuple):
    value: float
    degenerate: bool


def centering(features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    return features - features.mean(axis=0, keepdims=True)


def cka_result(features_a: np.ndarray, features_b: np.ndarray) -> CkaResult:
    """
    ||B_c^T A_c||_F^2 / (||A_c^T A_c||_F ||B_c^T B_c||_F) on column-centered features.
    Zero-variance inputs give 0 with the degenerate flag set.
    """
    a = np.atleast_2d(features_a)
    b = np.atleast_2d(features_b)
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"CKA needs the same probe rows, got {a.shape[0]} and {b.shape[0]}")
    a, b = centering(a), centering(b)
    norm_a = np.linalg.norm(a.T @ a)
    norm_b = np.linalg.norm(b.T @ b)
    if norm_a <= DEGENERATE_TOL or norm_b <= DEGENERATE_TOL:
        return CkaResult(0.0, True)
    hsic = np.linalg.norm(a.T @ b) ** 2
    return CkaResult(float(np.clip(hsic / (norm_a * norm_b), 0.0, 1.0)), False)


def cka(features_a: np.ndarray, features_b: np.ndarray) -> float:
    return cka_result(features_a, features_b).value
