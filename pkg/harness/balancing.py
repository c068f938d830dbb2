"""
Loss-balancing schemes: per-term weights computed from the training history

Weights returned here multiply the problem's own base coefficients.
"""
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from errors import NumericalError
from models import SchemeKind
from numerics.rng import stream
from schemas import BalancingScheme

GRAD_FLOOR = 1e-12
LOSS_FLOOR = 1e-12


@dataclass
class BalancingHistory:
    """Per-epoch loss values, gradient statistics and the weights that were applied"""
    terms: Tuple[str, ...]
    reference_term: str
    losses: List[np.ndarray] = field(default_factory=list)
    grad_l2: List[np.ndarray] = field(default_factory=list)
    grad_max_abs: List[np.ndarray] = field(default_factory=list)
    grad_mean_abs: List[np.ndarray] = field(default_factory=list)
    weights: List[np.ndarray] = field(default_factory=list)

    @property
    def reference_index(self) -> int:
        return self.terms.index(self.reference_term)

    def record(self, losses: Sequence[float], grads: Sequence[np.ndarray]) -> None:
        self.losses.append(np.asarray(losses, dtype=np.float64))
        self.grad_l2.append(np.array([np.linalg.norm(g) for g in grads]))
        self.grad_max_abs.append(np.array([np.max(np.abs(g)) for g in grads]))
        self.grad_mean_abs.append(np.array([np.mean(np.abs(g)) for g in grads]))


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - np.max(z))
    return e / e.sum()


def _previous(history: BalancingHistory, epoch: int) -> np.ndarray:
    if epoch > 0 and len(history.weights) >= epoch:
        return history.weights[epoch - 1]
    return np.ones(len(history.terms))


def _dwa(scheme, history, epoch):
    k = len(history.terms)
    if epoch < 2:
        return np.ones(k)
    ratios = history.losses[epoch - 1] / np.maximum(history.losses[epoch - 2], LOSS_FLOOR)
    return k * _softmax(ratios / scheme.dwa_temperature)


def _rlw(scheme, history, epoch, seed):
    k = len(history.terms)
    return k * _softmax(stream(seed, "rlw", epoch).standard_normal(k))


def _lr_annealing(scheme, history, epoch):
    alpha = scheme.lr_annealing_alpha
    ref = history.reference_index
    max_ref = history.grad_max_abs[epoch][ref]
    mean_abs = np.maximum(history.grad_mean_abs[epoch], GRAD_FLOOR)
    weights = alpha * _previous(history, epoch) + (1.0 - alpha) * (max_ref / mean_abs)
    weights[ref] = 1.0
    return weights


def _gradnorm(scheme, history, epoch):
    k = len(history.terms)
    prev = _previous(history, epoch)
    norms = history.grad_l2[epoch]
    ratios = history.losses[epoch] / np.maximum(history.losses[0], LOSS_FLOOR)
    relative = ratios / max(float(np.mean(ratios)), LOSS_FLOOR)
    weighted = prev * norms
    target = np.mean(weighted) * relative ** scheme.gradnorm_alpha
    # d|G_i - target_i| / dw_i with the target held constant
    step = np.sign(weighted - target) * norms
    weights = np.maximum(prev - scheme.gradnorm_lr * step, 0.0)
    total = weights.sum()
    if total <= 0:
        return np.ones(k)
    return k * weights / total


def compute_weights(scheme: BalancingScheme, history: BalancingHistory, epoch: int, seed: int = 0) -> np.ndarray:
    """Scheme weights for `epoch`; history must already hold that epoch's losses and gradient stats"""
    k = len(history.terms)
    if k == 1:
        return np.ones(1)
    kind = scheme.kind
    if kind is SchemeKind.EW:
        weights = np.ones(k)
    elif kind is SchemeKind.CW:
        weights = np.array([scheme.constant_weights.get(term, 1.0) for term in history.terms], dtype=np.float64)
    elif kind is SchemeKind.DWA:
        weights = _dwa(scheme, history, epoch)
    elif kind is SchemeKind.RLW:
        weights = _rlw(scheme, history, epoch, seed)
    elif kind is SchemeKind.LR_ANNEALING:
        weights = _lr_annealing(scheme, history, epoch)
    elif kind is SchemeKind.GRADNORM:
        weights = _gradnorm(scheme, history, epoch)
    else:
        raise ValueError(f"unknown balancing scheme {kind}")

    bad = np.flatnonzero(~np.isfinite(weights) | (weights < 0))
    if bad.size:
        raise NumericalError(f"{kind.value} produced weight {weights[bad[0]]!r} for {history.terms[bad[0]]}",
                             index=int(bad[0]))
    return weights
