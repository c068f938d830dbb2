"""
Trajectories: ordered checkpoints of one (or several merged) training runs
"""
import hashlib
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import InvalidInputError, ShapeError
from numerics.mlp import FlatParams
from schemas import MlpSpec

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class Segment:
    """Half-open checkpoint range [start, stop) belonging to one training run"""
    label: str
    start: int
    stop: int

    @property
    def count(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray
    std: np.ndarray
    floored: np.ndarray  # bool mask of coordinates whose std hit STD_FLOOR

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def invert(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=np.float64) * self.std + self.mean

    @classmethod
    def from_checkpoints(cls, checkpoints: np.ndarray) -> "NormStats":
        mean = checkpoints.mean(axis=0)
        std = checkpoints.std(axis=0, ddof=0)
        floored = std < STD_FLOOR
        std = np.where(floored, STD_FLOOR, std)
        for array in (mean, std, floored):
            array.setflags(write=False)
        return cls(mean, std, floored)


@dataclass(frozen=True)
class Trajectory:
    spec: MlpSpec
    checkpoints: np.ndarray  # (M, n)
    epochs: Tuple[int, ...]
    losses: Dict[str, np.ndarray]  # oracle name -> (M,)
    stride: int
    seeds: Dict[str, int] = field(default_factory=dict)
    problem: Optional[dict] = None
    scheme: Optional[dict] = None
    segments: Tuple[Segment, ...] = ()
    norm_stats: Optional[NormStats] = None
    normalized: bool = False

    def __post_init__(self):
        checkpoints = np.array(self.checkpoints, dtype=np.float64)
        if checkpoints.ndim != 2 or checkpoints.shape[0] < 2:
            raise InvalidInputError(f"a trajectory needs >= 2 checkpoints, got shape {checkpoints.shape}")
        if checkpoints.shape[1] != self.spec.parameter_count:
            raise ShapeError(
                f"checkpoints have {checkpoints.shape[1]} coordinates, spec needs {self.spec.parameter_count}"
            )
        count = checkpoints.shape[0]
        if len(self.epochs) != count:
            raise ShapeError(f"{len(self.epochs)} epochs for {count} checkpoints")
        losses = {}
        for name, values in self.losses.items():
            values = np.array(values, dtype=np.float64).reshape(-1)
            if values.size != count:
                raise ShapeError(f"loss {name!r} has {values.size} entries for {count} checkpoints")
            values.setflags(write=False)
            losses[name] = values
        segments = tuple(self.segments) or (Segment("run", 0, count),)
        if segments[0].start != 0 or segments[-1].stop != count or any(
            a.stop != b.start for a, b in zip(segments, segments[1:])
        ) or any(s.count < 1 for s in segments):
            raise InvalidInputError(f"segments {segments} do not tile {count} checkpoints")
        if self.normalized and self.norm_stats is None:
            raise InvalidInputError("a normalized trajectory must carry its norm stats")

        checkpoints.setflags(write=False)
        object.__setattr__(self, "checkpoints", checkpoints)
        object.__setattr__(self, "epochs", tuple(int(e) for e in self.epochs))
        object.__setattr__(self, "losses", losses)
        object.__setattr__(self, "segments", segments)

    @property
    def count(self) -> int:
        return self.checkpoints.shape[0]

    @property
    def oracle_names(self) -> List[str]:
        return list(self.losses)

    def raw_checkpoints(self) -> np.ndarray:
        if self.normalized:
            return self.norm_stats.invert(self.checkpoints)
        return self.checkpoints

    def normalized_checkpoints(self) -> np.ndarray:
        if self.normalized:
            return self.checkpoints
        stats = self.norm_stats or NormStats.from_checkpoints(self.checkpoints)
        return stats.apply(self.checkpoints)

    def checkpoint(self, index: int) -> FlatParams:
        """Checkpoint `index` in raw parameter space"""
        return FlatParams(self.spec, self.raw_checkpoints()[index])

    @property
    def d_max(self) -> float:
        """Largest first-to-last checkpoint distance over segments, in normalized space"""
        z = self.normalized_checkpoints()
        return max(float(np.linalg.norm(z[s.stop - 1] - z[s.start])) for s in self.segments)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.spec.model_dump_json().encode("utf-8"))
        h.update(np.ascontiguousarray(self.checkpoints, dtype="<f8").tobytes())
        return h.hexdigest()


def normalize(trajectory: Trajectory) -> Tuple[Trajectory, NormStats]:
    """Per-coordinate z-score of the checkpoints using the trajectory's own statistics"""
    if trajectory.normalized:
        return trajectory, trajectory.norm_stats
    stats = NormStats.from_checkpoints(trajectory.checkpoints)
    floored = int(stats.floored.sum())
    if floored:
        logger.warning("%d of %d coordinates have zero variance; std floored at %g",
                       floored, stats.std.size, STD_FLOOR)
    result = replace(trajectory, checkpoints=stats.apply(trajectory.checkpoints), norm_stats=stats, normalized=True)
    if not result.d_max > 0:
        raise InvalidInputError("first and last checkpoints coincide; d_max is 0 after normalization")
    return result, stats


def denormalize(stats: NormStats, flat, spec: MlpSpec) -> FlatParams:
    return FlatParams(spec, stats.invert(flat))


def merge_trajectories(trajectories: Sequence[Trajectory], labels: Optional[Sequence[str]] = None) -> Trajectory:
    """
    Concatenate raw trajectories that share one parameter layout into a single
    checkpoint set with one labelled segment per input run
    """
    if not trajectories:
        raise InvalidInputError("nothing to merge")
    labels = list(labels) if labels is not None else [f"run{i}" for i in range(len(trajectories))]
    if len(labels) != len(trajectories) or len(set(labels)) != len(labels):
        raise InvalidInputError(f"need one distinct label per trajectory, got {labels}")
    first = trajectories[0]
    names = set(first.losses)
    for traj in trajectories:
        if traj.spec != first.spec:
            raise ShapeError(f"cannot merge layouts {first.spec.layer_sizes} and {traj.spec.layer_sizes}")
        if set(traj.losses) != names:
            raise InvalidInputError("merged trajectories must record the same oracles")

    segments, offset = [], 0
    for label, traj in zip(labels, trajectories):
        segments.append(Segment(label, offset, offset + traj.count))
        offset += traj.count
    seeds = {f"{label}.{key}": value for label, traj in zip(labels, trajectories) for key, value in traj.seeds.items()}
    return Trajectory(
        spec=first.spec,
        checkpoints=np.concatenate([t.raw_checkpoints() for t in trajectories]),
        epochs=tuple(e for t in trajectories for e in t.epochs),
        losses={name: np.concatenate([t.losses[name] for t in trajectories]) for name in first.losses},
        stride=first.stride,
        seeds=seeds,
        problem=first.problem,
        scheme={label: t.scheme for label, t in zip(labels, trajectories)},
        segments=tuple(segments),
    )
