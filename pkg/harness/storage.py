"""
Trajectory files (NVTJ section TRAJ)
"""
import logging
from pathlib import Path
from typing import Union

import numpy as np

from harness.nvtj import read_container, write_container
from harness.trajectory import NormStats, Segment, Trajectory
from models import SectionTag
from schemas import MlpSpec

logger = logging.getLogger(__name__)


def save_trajectory(path: Union[str, Path], trajectory: Trajectory) -> Path:
    names = trajectory.oracle_names
    stats = trajectory.norm_stats or NormStats.from_checkpoints(trajectory.raw_checkpoints())
    header = {
        "spec": trajectory.spec.model_dump(mode="json"),
        "stride": trajectory.stride,
        "epochs": list(trajectory.epochs),
        "oracles": names,
        "seeds": trajectory.seeds,
        "problem": trajectory.problem,
        "scheme": trajectory.scheme,
        "segments": [[s.label, s.start, s.stop] for s in trajectory.segments],
        "normalized": trajectory.normalized,
        "norm_floored": np.flatnonzero(stats.floored).tolist(),
    }
    if names:
        table = np.column_stack([trajectory.losses[name] for name in names])
    else:
        table = np.zeros((trajectory.count, 0))
    arrays = [
        ("checkpoints", trajectory.checkpoints),
        ("losses", table),
        ("norm_mean", stats.mean),
        ("norm_std", stats.std),
    ]
    path = write_container(path, SectionTag.TRAJECTORY, header, arrays)
    logger.info("wrote %d checkpoints to %s", trajectory.count, path)
    return path


def load_trajectory(path: Union[str, Path]) -> Trajectory:
    header, arrays = read_container(path, SectionTag.TRAJECTORY)
    mean, std = arrays["norm_mean"], arrays["norm_std"]
    floored = np.zeros(std.shape, dtype=bool)
    floored[header["norm_floored"]] = True
    for array in (mean, std, floored):
        array.setflags(write=False)
    table = arrays["losses"]
    return Trajectory(
        spec=MlpSpec.model_validate(header["spec"]),
        checkpoints=arrays["checkpoints"],
        epochs=tuple(header["epochs"]),
        losses={name: table[:, i] for i, name in enumerate(header["oracles"])},
        stride=header["stride"],
        seeds=header["seeds"],
        problem=header["problem"],
        scheme=header["scheme"],
        segments=tuple(Segment(label, start, stop) for label, start, stop in header["segments"]),
        norm_stats=NormStats(mean, std, floored),
        normalized=header["normalized"],
    )
