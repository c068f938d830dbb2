"""
Latent meshes decoded to parameter space and evaluated against loss oracles
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np

from config import settings
from errors import OracleNotFoundError, TrajscapeError
from harness.trajectory import Trajectory
from landscape.projectors import Projector, decode_raw, encode_raw
from numerics.mlp import FlatParams
from oracles.base import LossOracle
from schemas import GridSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LandscapeGrid:
    """
    A scalar field over a latent mesh, values[iy, ix] at (xs[ix], ys[iy]),
    with the trajectory's encoded checkpoints as an overlay.
    """
    spec: GridSpec
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    field_name: str
    method: str
    overlay_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    overlay_values: Optional[np.ndarray] = None
    overlay_name: Optional[str] = None
    segments: Tuple[Tuple[str, int, int], ...] = ()
    failed_points: int = 0
    provenance: Dict[str, str] = field(default_factory=dict)

    @property
    def finite_range(self) -> Tuple[float, float]:
        finite = self.values[np.isfinite(self.values)]
        if not finite.size:
            return (math.nan, math.nan)
        return float(finite.min()), float(finite.max())


def mesh(spec: GridSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Axis coordinates and the (resolution^2, 2) mesh points in row-major (iy, ix) order"""
    x1, x2, y1, y2 = spec.window
    xs = np.linspace(x1, x2, spec.resolution)
    ys = np.linspace(y1, y2, spec.resolution)
    gx, gy = np.meshgrid(xs, ys)
    return xs, ys, np.column_stack([gx.reshape(-1), gy.reshape(-1)])


def _safe_eval(oracle: LossOracle, params: FlatParams) -> float:
    try:
        value = oracle(params)
    except (TrajscapeError, ArithmeticError, ValueError) as exc:
        logger.debug("oracle %s failed at a mesh point: %s", oracle.name, exc)
        return math.nan
    return value if math.isfinite(value) else math.nan


def _overlay(model: Projector, trajectory: Optional[Trajectory], oracle_name: str):
    if trajectory is None:
        return np.zeros((0, 2)), None, ()
    if oracle_name not in trajectory.losses:
        raise OracleNotFoundError(
            f"trajectory has no recorded {oracle_name!r}; recorded: {trajectory.oracle_names}", stage="landscape"
        )
    points = encode_raw(model, trajectory.raw_checkpoints())
    segments = tuple((s.label, s.start, s.stop) for s in trajectory.segments)
    return points, trajectory.losses[oracle_name], segments


def evaluate_grid(
    model: Projector,
    spec: GridSpec,
    oracle: LossOracle,
    trajectory: Optional[Trajectory] = None,
    workers: Optional[int] = None,
) -> LandscapeGrid:
    """Decode every mesh point, evaluate the oracle there and overlay the trajectory's recorded losses"""
    xs, ys, points = mesh(spec)
    thetas = decode_raw(model, points)
    params = [FlatParams(model.spec, theta) for theta in thetas]
    workers = workers or settings.WORKERS
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda p: _safe_eval(oracle, p), params))
    else:
        values = [_safe_eval(oracle, p) for p in params]

    field_values = np.array(values, dtype=np.float64).reshape(spec.resolution, spec.resolution)
    failed = int(np.isnan(field_values).sum())
    if failed:
        logger.warning("%s: oracle %s failed at %d of %d mesh points", model.method.value, oracle.name,
                       failed, field_values.size)

    overlay_points, overlay_values, segments = _overlay(model, trajectory, oracle.name)
    provenance = {"oracle": oracle.name}
    if trajectory is not None:
        provenance["trajectory"] = trajectory.digest()
    return LandscapeGrid(
        spec=spec,
        xs=xs,
        ys=ys,
        values=field_values,
        field_name=oracle.name,
        method=model.method.value,
        overlay_points=overlay_points,
        overlay_values=overlay_values,
        overlay_name=oracle.name if trajectory is not None else None,
        segments=segments,
        failed_points=failed,
        provenance=provenance,
    )


def with_overlay(grid: LandscapeGrid, values: np.ndarray, name: str) -> LandscapeGrid:
    return replace(grid, overlay_values=np.asarray(values, dtype=np.float64), overlay_name=name)
