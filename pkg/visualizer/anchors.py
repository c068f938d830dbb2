"""
Anchor sets: checkpoints pinned to fixed latent targets
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from errors import ConfigError, InvalidInputError
from harness.trajectory import Trajectory
from models import AnchorMode


@dataclass(frozen=True)
class AnchorSet:
    indices: np.ndarray  # checkpoint indices
    targets: np.ndarray  # (k, 2) latent targets

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        targets = np.asarray(self.targets, dtype=np.float64).reshape(-1, 2)
        if indices.size != targets.shape[0]:
            raise InvalidInputError(f"{indices.size} anchor indices for {targets.shape[0]} targets")
        if np.any(np.abs(targets) > 1.0 + 1e-12):
            raise InvalidInputError("anchor targets must lie in [-1, 1]^2")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return int(self.indices.size)

    @classmethod
    def empty(cls) -> "AnchorSet":
        return cls(np.zeros(0, dtype=np.int64), np.zeros((0, 2)))


def circle_points(n: int, r: float) -> np.ndarray:
    k = np.arange(n)
    angle = 2.0 * np.pi * k / n
    return np.column_stack([r * np.sin(angle), r * np.cos(angle)])


def designated_models(trajectory: Trajectory) -> List[int]:
    """Final model of every run for merged trajectories, every checkpoint otherwise"""
    if len(trajectory.segments) > 1:
        return [segment.stop - 1 for segment in trajectory.segments]
    return list(range(trajectory.count))


def build_anchors(mode: AnchorMode, trajectory: Trajectory, r: float = 0.8, n_circle: Optional[int] = None) -> AnchorSet:
    mode = AnchorMode(mode)
    if not 0.0 < r <= 1.0:
        raise ConfigError(f"anchor radius must be in (0, 1], got {r}")
    first = trajectory.segments[0].start
    last = trajectory.segments[-1].stop - 1

    if mode is AnchorMode.NONE:
        return AnchorSet.empty()
    if mode is AnchorMode.POLAR:
        return AnchorSet([first, last], [(-r, -r), (r, r)])
    if mode is AnchorMode.CENTER:
        return AnchorSet([last], [(0.0, 0.0)])

    designated = designated_models(trajectory)
    n = len(designated) if n_circle is None else n_circle
    if n < 1 or n > len(designated):
        raise ConfigError(f"circle pinning of {n} points needs 1..{len(designated)} designated models")
    picks = np.round(np.linspace(0, len(designated) - 1, n)).astype(int) if n > 1 else np.array([len(designated) - 1])
    return AnchorSet([designated[i] for i in picks], circle_points(n, r))
