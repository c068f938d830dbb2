"""
PCA plane through the final checkpoint
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from baselines.common import fit_scale, norm_from_arrays, norm_header
from errors import DegenerateBasisError, InvalidInputError
from harness.nvtj import read_container, write_container
from harness.trajectory import NormStats, Trajectory
from models import Method, SectionTag
from numerics.linalg import symmetric_eigen
from numerics.mlp import FlatParams
from schemas import MlpSpec

logger = logging.getLogger(__name__)

RANK_TOL = 1e-12


@dataclass(frozen=True)
class PcaPlane:
    spec: MlpSpec
    norm_stats: NormStats
    origin: np.ndarray  # final checkpoint, normalized
    basis: np.ndarray  # (2, n) orthonormal rows
    center: np.ndarray  # (2,)
    half: np.ndarray  # (2,)

    method = Method.PCA

    def encode_normalized(self, z: np.ndarray) -> np.ndarray:
        coeffs = (np.asarray(z, dtype=np.float64) - self.origin) @ self.basis.T
        return (coeffs - self.center) / self.half

    def decode_normalized(self, latent: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(latent, dtype=np.float64) * self.half + self.center
        return self.origin + coeffs @ self.basis


def top_components(centered: np.ndarray, count: int = 2):
    """Leading eigenpairs of the Gram matrix of centered rows, descending"""
    gram = centered @ centered.T
    values, vectors = symmetric_eigen(0.5 * (gram + gram.T))
    order = np.argsort(values)[::-1][:count]
    return values[order], vectors[:, order]


def fit_pca(trajectory: Trajectory) -> PcaPlane:
    if trajectory.count < 3:
        raise InvalidInputError("PCA needs >= 3 checkpoints for a stable 2-D basis")
    if trajectory.normalized:
        z, stats = trajectory.checkpoints, trajectory.norm_stats
    else:
        stats = NormStats.from_checkpoints(trajectory.checkpoints)
        z = stats.apply(trajectory.checkpoints)

    centered = z - z.mean(axis=0)
    values, vectors = top_components(centered)
    if values[0] <= RANK_TOL or values[1] <= RANK_TOL * values[0]:
        raise DegenerateBasisError(f"trajectory spans fewer than two directions (eigenvalues {values})")
    basis = (centered.T @ vectors / np.sqrt(values)).T
    # one Gram-Schmidt pass keeps the rows orthonormal to round-off
    basis[0] /= np.linalg.norm(basis[0])
    basis[1] -= (basis[1] @ basis[0]) * basis[0]
    basis[1] /= np.linalg.norm(basis[1])

    origin = z[-1].copy()
    center, half = fit_scale((z - origin) @ basis.T)
    for array in (origin, basis, center, half):
        array.setflags(write=False)
    logger.info("PCA plane explains %.3f of trajectory variance", float(values.sum() / np.sum(centered ** 2)))
    return PcaPlane(trajectory.spec, stats, origin, basis, center, half)


def pca_encode(plane: PcaPlane, params: Union[FlatParams, np.ndarray]) -> np.ndarray:
    theta = params.theta if isinstance(params, FlatParams) else np.asarray(params, dtype=np.float64)
    return plane.encode_normalized(plane.norm_stats.apply(theta))


def pca_decode(plane: PcaPlane, latent) -> FlatParams:
    return FlatParams(plane.spec, plane.norm_stats.invert(plane.decode_normalized(latent)))


def save_pca(path: Union[str, Path], plane: PcaPlane) -> Path:
    header = {"spec": plane.spec.model_dump(mode="json"), "norm_floored": norm_header(plane.norm_stats)}
    arrays = [
        ("origin", plane.origin),
        ("basis", plane.basis),
        ("center", plane.center),
        ("half", plane.half),
        ("norm_mean", plane.norm_stats.mean),
        ("norm_std", plane.norm_stats.std),
    ]
    return write_container(path, SectionTag.PCA, header, arrays)


def load_pca(path: Union[str, Path]) -> PcaPlane:
    header, arrays = read_container(path, SectionTag.PCA)
    return PcaPlane(
        spec=MlpSpec.model_validate(header["spec"]),
        norm_stats=norm_from_arrays(arrays["norm_mean"], arrays["norm_std"], header["norm_floored"]),
        origin=arrays["origin"],
        basis=arrays["basis"],
        center=arrays["center"],
        half=arrays["half"],
    )
