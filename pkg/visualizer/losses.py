"""
Constraint losses of the visualizer, each returning its value and the
gradients w.r.t. the encoder and decoder parameters.

Every loss works on normalized checkpoints. MSE means the mean over both
batch and coordinate axes.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from harness.trajectory import Segment
from numerics.mlp import mlp_backward, mlp_forward
from visualizer.anchors import AnchorSet
from visualizer.model import VisualizerModel

LOG_EPS = 1e-12


@dataclass
class LossValue:
    value: float
    encoder_grad: np.ndarray
    decoder_grad: np.ndarray

    @classmethod
    def zero(cls, model: VisualizerModel) -> "LossValue":
        return cls(0.0, np.zeros_like(model.encoder.theta), np.zeros_like(model.decoder.theta))


def _safe_unit(vectors: np.ndarray, norms: np.ndarray) -> np.ndarray:
    # gradient of a norm is taken as 0 where the norm vanishes
    out = np.zeros_like(vectors)
    nonzero = norms > 0
    out[nonzero] = vectors[nonzero] / norms[nonzero, None]
    return out


def loss_rec(model: VisualizerModel, batch: np.ndarray) -> LossValue:
    batch = np.atleast_2d(batch)
    latent, enc_cache = mlp_forward(model.encoder, batch)
    recon, dec_cache = mlp_forward(model.decoder, latent)
    diff = recon - batch
    upstream = 2.0 * diff / diff.size
    dec_grad, latent_grad = mlp_backward(model.decoder, dec_cache, upstream)
    enc_grad, _ = mlp_backward(model.encoder, enc_cache, latent_grad)
    return LossValue(float(np.mean(diff ** 2)), enc_grad, dec_grad)


def loss_anch(model: VisualizerModel, checkpoints: np.ndarray, anchors: AnchorSet) -> LossValue:
    if len(anchors) == 0:
        return LossValue.zero(model)
    latent, cache = mlp_forward(model.encoder, checkpoints[anchors.indices])
    diff = latent - anchors.targets
    enc_grad, _ = mlp_backward(model.encoder, cache, 2.0 * diff / diff.size)
    return LossValue(float(np.mean(diff ** 2)), enc_grad, np.zeros_like(model.decoder.theta))


def loss_traj(model: VisualizerModel, checkpoints: np.ndarray, segments: Sequence[Segment]) -> LossValue:
    """Variance of consecutive latent step lengths, averaged over runs with >= 3 checkpoints"""
    usable = [s for s in segments if s.count >= 3]
    if not usable:
        return LossValue.zero(model)
    latent, cache = mlp_forward(model.encoder, checkpoints)
    latent_grad = np.zeros_like(latent)
    total = 0.0
    for segment in usable:
        z = latent[segment.start:segment.stop]
        steps = z[1:] - z[:-1]
        lengths = np.linalg.norm(steps, axis=1)
        centered = lengths - lengths.mean()
        total += float(np.mean(centered ** 2))
        step_grad = (2.0 * centered / lengths.size)[:, None] * _safe_unit(steps, lengths)
        latent_grad[segment.start + 1:segment.stop] += step_grad
        latent_grad[segment.start:segment.stop - 1] -= step_grad
    scale = 1.0 / len(usable)
    enc_grad, _ = mlp_backward(model.encoder, cache, latent_grad * scale)
    return LossValue(total * scale, enc_grad, np.zeros_like(model.decoder.theta))


def nearest_checkpoints(points: np.ndarray, checkpoints: np.ndarray) -> np.ndarray:
    """Index of the closest checkpoint to each point; ties go to the lowest index"""
    sq = (
        np.sum(points ** 2, axis=1)[:, None]
        - 2.0 * points @ checkpoints.T
        + np.sum(checkpoints ** 2, axis=1)[None, :]
    )
    return np.argmin(sq, axis=1)


def grid_terms(model: VisualizerModel, checkpoints: np.ndarray, samples: np.ndarray):
    """(d_m, l_m, nearest index) for each latent sample"""
    recon = model.decode_normalized(samples)
    nearest = nearest_checkpoints(recon, checkpoints)
    d = np.linalg.norm(recon - checkpoints[nearest], axis=1)
    l = np.linalg.norm(samples - model.encode_normalized(checkpoints[nearest]), axis=1)
    return d, l, nearest


def grid_scaling_fit(model: VisualizerModel, checkpoints: np.ndarray, samples: np.ndarray) -> Tuple[float, float]:
    """Pearson correlation of (l_m, log d_m) and the mean offset log d_m - l_m"""
    d, l, _ = grid_terms(model, checkpoints, np.atleast_2d(samples))
    log_d = np.log(d + LOG_EPS)
    return float(np.corrcoef(l, log_d)[0, 1]), float(np.mean(log_d - l))


def loss_grid(model: VisualizerModel, checkpoints: np.ndarray, samples: np.ndarray, d_max: float, l_max: float) -> LossValue:
    """mean((log(d_m + eps) - l_m - log d_max + l_max)^2); the nearest-checkpoint choice is held fixed"""
    samples = np.atleast_2d(samples)
    recon, dec_cache = mlp_forward(model.decoder, samples)
    nearest = nearest_checkpoints(recon, checkpoints)
    delta = recon - checkpoints[nearest]
    d = np.linalg.norm(delta, axis=1)
    projected, enc_cache = mlp_forward(model.encoder, checkpoints[nearest])
    offset = samples - projected
    l = np.linalg.norm(offset, axis=1)

    residual = np.log(d + LOG_EPS) - l - np.log(d_max) + l_max
    g = 2.0 * residual / residual.size
    recon_grad = (g / (d + LOG_EPS))[:, None] * _safe_unit(delta, d)
    dec_grad, _ = mlp_backward(model.decoder, dec_cache, recon_grad)
    # residual carries -l and l = |g - E(x)|, so d residual / dE(x) = +unit(offset)
    enc_grad, _ = mlp_backward(model.encoder, enc_cache, g[:, None] * _safe_unit(offset, l))
    return LossValue(float(np.mean(residual ** 2)), enc_grad, dec_grad)


@dataclass
class ConstraintBatch:
    """Everything one optimization step needs to evaluate the constraints"""
    checkpoints: np.ndarray
    batch: np.ndarray
    segments: Tuple[Segment, ...]
    anchors: AnchorSet
    samples: Optional[np.ndarray]
    d_max: float
    l_max: float


Constraint = Callable[[VisualizerModel, ConstraintBatch], LossValue]

CONSTRAINTS: Dict[str, Constraint] = {
    "L_rec": lambda model, ctx: loss_rec(model, ctx.batch),
    "L_anch": lambda model, ctx: loss_anch(model, ctx.checkpoints, ctx.anchors),
    "L_traj": lambda model, ctx: loss_traj(model, ctx.checkpoints, ctx.segments),
    "L_grid": lambda model, ctx: (
        loss_grid(model, ctx.checkpoints, ctx.samples, ctx.d_max, ctx.l_max)
        if ctx.samples is not None else LossValue.zero(model)
    ),
}


def register_constraint(name: str, constraint: Constraint) -> None:
    if name in CONSTRAINTS:
        raise ValueError(f"constraint {name!r} already registered")
    CONSTRAINTS[name] = constraint


def total_loss(model: VisualizerModel, ctx: ConstraintBatch, weights: Dict[str, float]) -> Tuple[LossValue, Dict[str, float]]:
    """Weighted sum of the constraints with non-zero weight, plus each component's value"""
    total = LossValue.zero(model)
    components = {}
    for name, weight in weights.items():
        if weight == 0:
            components[name] = 0.0
            continue
        part = CONSTRAINTS[name](model, ctx)
        components[name] = part.value
        total.value += weight * part.value
        total.encoder_grad += weight * part.encoder_grad
        total.decoder_grad += weight * part.decoder_grad
    return total, components
