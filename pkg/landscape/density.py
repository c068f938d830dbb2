"""
CKA density landscape: rho(m) = sum over the other mesh networks m' of CKA(m', m)
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np

from config import settings
from errors import ConfigError
from harness.trajectory import Trajectory
from landscape.cka import DEGENERATE_TOL, centering
from landscape.grid import LandscapeGrid, mesh
from landscape.projectors import Projector, decode_raw, encode_raw
from numerics.mlp import FlatParams, hidden_features
from schemas import GridSpec

logger = logging.getLogger(__name__)

BLOCK_BYTES = 64 * 2 ** 20
NEAR_RADIUS = 0.2


def _unit_grams(model: Projector, thetas: np.ndarray, probe: np.ndarray):
    """Flattened centered Gram matrices scaled to unit Frobenius norm; degenerate rows stay 0"""
    rows = np.zeros((len(thetas), probe.shape[0] ** 2))
    degenerate = np.zeros(len(thetas), dtype=bool)
    for i, theta in enumerate(thetas):
        a = centering(hidden_features(FlatParams(model.spec, theta), probe))
        gram = a @ a.T
        norm = np.linalg.norm(gram)
        if norm <= DEGENERATE_TOL:
            degenerate[i] = True
            continue
        rows[i] = gram.reshape(-1) / norm
    return rows, degenerate


def density_values(model: Projector, thetas: np.ndarray, probe: np.ndarray) -> np.ndarray:
    """
    Sum of linear CKA to every other network, using <K_a, K_b> / (|K_a| |K_b|) on
    centered Grams, which equals the feature-space CKA. Blocked to bound memory.
    """
    count = len(thetas)
    block = max(1, int(BLOCK_BYTES // (8 * probe.shape[0] ** 2)))
    starts = list(range(0, count, block))
    rho = np.zeros(count)
    degenerate_total = 0
    for i0 in starts:
        rows_i, degenerate = _unit_grams(model, thetas[i0:i0 + block], probe)
        degenerate_total += int(degenerate.sum())
        for j0 in starts:
            rows_j = rows_i if j0 == i0 else _unit_grams(model, thetas[j0:j0 + block], probe)[0]
            rho[i0:i0 + block] += (rows_i @ rows_j.T).sum(axis=1)
        rho[i0:i0 + block] -= np.sum(rows_i * rows_i, axis=1)
    if degenerate_total:
        logger.warning("%d of %d decoded networks have zero-variance features; their CKA is 0",
                       degenerate_total, count)
    return rho


def density_grid(
    model: Projector,
    spec: GridSpec,
    probe_inputs: np.ndarray,
    trajectory: Optional[Trajectory] = None,
    max_resolution: Optional[int] = None,
) -> LandscapeGrid:
    cap = max_resolution or settings.DENSITY_MAX_RESOLUTION
    if spec.resolution > cap:
        raise ConfigError(f"density resolution {spec.resolution} exceeds the cap of {cap}; pass a larger max_resolution",
                          stage="density")
    probe = np.atleast_2d(np.asarray(probe_inputs, dtype=np.float64))
    xs, ys, points = mesh(spec)
    rho = density_values(model, decode_raw(model, points), probe)

    overlay = np.zeros((0, 2))
    segments: Sequence = ()
    provenance = {"oracle": "cka_density", "probe_rows": str(probe.shape[0])}
    if trajectory is not None:
        overlay = encode_raw(model, trajectory.raw_checkpoints())
        segments = tuple((s.label, s.start, s.stop) for s in trajectory.segments)
        provenance["trajectory"] = trajectory.digest()
    return LandscapeGrid(
        spec=spec,
        xs=xs,
        ys=ys,
        values=rho.reshape(spec.resolution, spec.resolution),
        field_name="cka_density",
        method=model.method.value,
        overlay_points=overlay,
        segments=tuple(segments),
        provenance=provenance,
    )


def near_trajectory_density(grid: LandscapeGrid, radius: float = NEAR_RADIUS) -> float:
    """Mean density over mesh points within `radius` (latent units) of any encoded checkpoint"""
    if not len(grid.overlay_points):
        raise ConfigError("density grid carries no trajectory overlay", stage="density")
    gx, gy = np.meshgrid(grid.xs, grid.ys)
    points = np.column_stack([gx.reshape(-1), gy.reshape(-1)])
    gaps = np.linalg.norm(points[:, None, :] - grid.overlay_points[None, :, :], axis=2)
    near = gaps.min(axis=1) <= radius
    if not near.any():
        logger.warning("no mesh point lies within %g of the trajectory; raise the density resolution", radius)
        return math.nan
    return float(np.mean(grid.values.reshape(-1)[near]))
