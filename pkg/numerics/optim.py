"""
Adam with bias correction
"""
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from errors import NumericalError, ShapeError


@dataclass(frozen=True)
class AdamState:
    t: int
    m: np.ndarray
    v: np.ndarray
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, size: int, lr: float = 1e-3, **kwargs) -> "AdamState":
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        return cls(0, np.zeros(size), np.zeros(size), lr, **kwargs)


def adam_step(state: AdamState, theta: np.ndarray, grad: np.ndarray) -> Tuple[np.ndarray, AdamState]:
    """One Adam update; returns the new theta and the new state"""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if not (theta.shape == grad.shape == state.m.shape == state.v.shape):
        raise ShapeError(
            f"Adam shapes disagree: theta {theta.shape}, grad {grad.shape}, moments {state.m.shape}"
        )
    bad = np.flatnonzero(~np.isfinite(grad))
    if bad.size:
        raise NumericalError(f"non-finite gradient entry at index {bad[0]}", index=int(bad[0]))

    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new_theta = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_theta, replace(state, t=t, m=m, v=v)
