"""
Training loop of the constrained auto-encoder
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from errors import TrainingAbortedError, UsageError
from harness.trajectory import Trajectory
from numerics.mlp import init_params
from numerics.optim import AdamState, adam_step
from numerics.rng import stream
from schemas import VisualizerConfig
from visualizer.anchors import build_anchors
from visualizer.losses import ConstraintBatch, total_loss
from visualizer.model import VisualizerModel, decoder_spec, encoder_spec

logger = logging.getLogger(__name__)

LOG_EVERY = 500


@dataclass
class TrainingLog:
    """Per-epoch mean of each loss component over the epoch's minibatches"""
    rows: List[Dict[str, float]] = field(default_factory=list)

    def append(self, epoch: int, components: Dict[str, float]) -> None:
        self.rows.append({"epoch": epoch, **components})

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows])


def constraint_weights(config: VisualizerConfig) -> Dict[str, float]:
    return {"L_rec": config.c_rec, "L_anch": config.c_anch, "L_traj": config.c_traj, "L_grid": config.c_grid}


def initial_model(trajectory: Trajectory, config: VisualizerConfig) -> VisualizerModel:
    n = trajectory.spec.parameter_count
    return VisualizerModel(
        encoder=init_params(encoder_spec(n, config.hidden_sizes), config.seed, "encoder"),
        decoder=init_params(decoder_spec(n, config.hidden_sizes), config.seed, "decoder"),
        norm_stats=trajectory.norm_stats,
        spec=trajectory.spec,
        config=config,
        trajectory_digest=trajectory.digest(),
    )


def train_visualizer(trajectory: Trajectory, config: VisualizerConfig) -> Tuple[VisualizerModel, TrainingLog]:
    if not trajectory.normalized:
        raise UsageError("train_visualizer needs a normalized trajectory", stage="fit")
    model = initial_model(trajectory, config)
    anchors = build_anchors(config.anchor_mode, trajectory, config.anchor_radius, config.circle_count)
    weights = constraint_weights(config)
    checkpoints = trajectory.checkpoints
    count = trajectory.count
    d_max = trajectory.d_max

    enc_state = AdamState.zeros(model.encoder.theta.size, config.lr)
    dec_state = AdamState.zeros(model.decoder.theta.size, config.lr)
    enc_theta, dec_theta = model.encoder.theta.copy(), model.decoder.theta.copy()
    log = TrainingLog()
    step = 0

    for epoch in range(config.epochs):
        order = stream(config.seed, "batch", epoch).permutation(count)
        sums = dict.fromkeys(weights, 0.0)
        sums["total"] = 0.0
        batches = 0
        for start in range(0, count, config.batch_size):
            samples = None
            if config.c_grid > 0:
                samples = stream(config.seed, "grid", step).uniform(-1.0, 1.0, (config.grid_samples, 2))
            ctx = ConstraintBatch(
                checkpoints=checkpoints,
                batch=checkpoints[order[start:start + config.batch_size]],
                segments=trajectory.segments,
                anchors=anchors,
                samples=samples,
                d_max=d_max,
                l_max=config.l_max,
            )
            loss, components = total_loss(model, ctx, weights)
            if not math.isfinite(loss.value):
                raise TrainingAbortedError("non-finite visualizer loss", epoch=epoch, breakdown=components, stage="fit")
            enc_theta, enc_state = adam_step(enc_state, enc_theta, loss.encoder_grad)
            dec_theta, dec_state = adam_step(dec_state, dec_theta, loss.decoder_grad)
            model = model.with_theta(enc_theta, dec_theta)

            for name, value in components.items():
                sums[name] += value
            sums["total"] += loss.value
            batches += 1
            step += 1

        log.append(epoch, {name: value / batches for name, value in sums.items()})
        if epoch % LOG_EVERY == 0:
            logger.debug("epoch %d: %s", epoch, " ".join(f"{k}={v:.4g}" for k, v in log.rows[-1].items() if k != "epoch"))

    logger.info("visualizer trained for %d epochs (%d steps), final L_rec %.4g",
                config.epochs, step, log.rows[-1]["L_rec"])
    return model, log
