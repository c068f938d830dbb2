"""
Manifold fidelity: how well decode(encode(m)) reproduces each checkpoint's
loss and position
"""
import logging
from dataclasses import dataclass

import numpy as np

from errors import OracleNotFoundError
from harness.trajectory import Trajectory
from landscape.grid import LandscapeGrid, evaluate_grid, with_overlay
from landscape.projectors import Projector
from models import ErrorKind
from numerics.mlp import FlatParams
from oracles.base import LossOracle
from schemas import FidelityReport, GridSpec

logger = logging.getLogger(__name__)

RELATIVE_EPS = 1e-12


@dataclass(frozen=True)
class CheckpointErrors:
    loss_errors: np.ndarray  # |L(m') - L(m)|
    relative_errors: np.ndarray  # |L(m') - L(m)| / (|L(m)| + eps)
    distances: np.ndarray  # |m' - m| in normalized space
    d_max: float


def segment_d_max(z: np.ndarray, trajectory: Trajectory) -> float:
    return max(float(np.linalg.norm(z[s.stop - 1] - z[s.start])) for s in trajectory.segments)


def checkpoint_errors(model: Projector, trajectory: Trajectory, oracle: LossOracle) -> CheckpointErrors:
    if oracle.name not in trajectory.losses:
        raise OracleNotFoundError(f"trajectory has no recorded {oracle.name!r}", stage="fidelity")
    recorded = trajectory.losses[oracle.name]
    z = model.norm_stats.apply(trajectory.raw_checkpoints())
    recon = model.decode_normalized(model.encode_normalized(z))
    reconstructed = np.array([
        oracle(FlatParams(model.spec, theta)) for theta in model.norm_stats.invert(recon)
    ])
    loss_errors = np.abs(reconstructed - recorded)
    return CheckpointErrors(
        loss_errors=loss_errors,
        relative_errors=loss_errors / (np.abs(recorded) + RELATIVE_EPS),
        distances=np.linalg.norm(recon - z, axis=1),
        d_max=segment_d_max(z, trajectory),
    )


def fidelity(model: Projector, trajectory: Trajectory, oracle: LossOracle) -> FidelityReport:
    errors = checkpoint_errors(model, trajectory, oracle)
    report = FidelityReport(
        method=model.method.value,
        oracle=oracle.name,
        e_relative=float(np.mean(errors.relative_errors)),
        e_proj=float(np.mean(errors.distances) / errors.d_max),
        loss_errors=errors.loss_errors.tolist(),
        relative_errors=errors.relative_errors.tolist(),
        projection_distances=errors.distances.tolist(),
        d_max=errors.d_max,
    )
    logger.info("%s fidelity on %s: e_relative=%.4g e_proj=%.4g", report.method, oracle.name,
                report.e_relative, report.e_proj)
    return report


def error_grid(
    model: Projector,
    trajectory: Trajectory,
    oracle: LossOracle,
    kind: ErrorKind,
    spec: GridSpec = GridSpec(),
) -> LandscapeGrid:
    """Loss landscape whose overlay carries per-checkpoint loss errors or projection distances"""
    kind = ErrorKind(kind)
    errors = checkpoint_errors(model, trajectory, oracle)
    values = errors.loss_errors if kind is ErrorKind.LOSS_ERROR else errors.distances
    return with_overlay(evaluate_grid(model, spec, oracle, trajectory), values, kind.value)
