"""
Kernel-PCA with an RBF kernel and a kernel-ridge inverse map from latent codes
back to (normalized) parameter space
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from baselines.common import fit_scale, median_gamma, norm_from_arrays, norm_header, pairwise_sq_dists
from errors import ConfigError, DegenerateBasisError, IllConditionedError, InvalidInputError
from harness.nvtj import read_container, write_container
from harness.trajectory import NormStats, Trajectory
from models import Method, SectionTag
from numerics.linalg import symmetric_eigen
from numerics.mlp import FlatParams
from schemas import MlpSpec

logger = logging.getLogger(__name__)

RIDGE = 1e-6
MAX_CONDITION = 1e12
RANK_TOL = 1e-12
KERNELS = ("rbf", "linear")


def _kernel(kind: str, gamma: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return a @ b.T
    return np.exp(-gamma * pairwise_sq_dists(a, b))


@dataclass(frozen=True)
class KpcaModel:
    spec: MlpSpec
    norm_stats: NormStats
    kernel: str
    gamma: float
    support: np.ndarray  # (M, n) normalized checkpoints
    alphas: np.ndarray  # (M, 2) scaled top eigenvectors of the centered kernel
    kernel_col_mean: np.ndarray  # (M,)
    kernel_mean: float
    center: np.ndarray
    half: np.ndarray
    inverse_gamma: float
    latent_codes: np.ndarray  # (M, 2) scaled codes of the support points
    inverse_coef: np.ndarray  # (M, n)
    target_mean: np.ndarray  # (n,)
    fit_residuals: np.ndarray  # (M,) |decode(encode(m_i)) - m_i|

    method = Method.KPCA

    def _codes(self, z: np.ndarray) -> np.ndarray:
        k = _kernel(self.kernel, self.gamma, z, self.support)
        centered = k - k.mean(axis=1, keepdims=True) - self.kernel_col_mean[None, :] + self.kernel_mean
        return centered @ self.alphas

    def encode_normalized(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        single = z.ndim == 1
        latent = (self._codes(np.atleast_2d(z)) - self.center) / self.half
        return latent[0] if single else latent

    def decode_normalized(self, latent: np.ndarray) -> np.ndarray:
        latent = np.asarray(latent, dtype=np.float64)
        single = latent.ndim == 1
        g = np.exp(-self.inverse_gamma * pairwise_sq_dists(np.atleast_2d(latent), self.latent_codes))
        out = self.target_mean + g @ self.inverse_coef
        return out[0] if single else out


def _fit_inverse(codes: np.ndarray, targets: np.ndarray, ridge: float):
    gamma = median_gamma(codes)
    if gamma <= 0:
        raise DegenerateBasisError("all latent codes coincide; no inverse map can be fitted")
    gram = np.exp(-gamma * pairwise_sq_dists(codes, codes))
    values, vectors = symmetric_eigen(0.5 * (gram + gram.T))
    shifted = values + ridge
    condition = float(np.max(np.abs(shifted)) / max(np.min(np.abs(shifted)), np.finfo(float).tiny))
    if condition > MAX_CONDITION:
        raise IllConditionedError("kernel ridge system for the inverse map", condition=condition, stage="fit")
    mean = targets.mean(axis=0)
    coef = vectors @ ((vectors.T @ (targets - mean)) / shifted[:, None])
    return gamma, coef, mean


def fit_kpca(trajectory: Trajectory, gamma: Optional[float] = None, kernel: str = "rbf", ridge: float = RIDGE) -> KpcaModel:
    if kernel not in KERNELS:
        raise ConfigError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
    if trajectory.count < 3:
        raise InvalidInputError("Kernel-PCA needs >= 3 checkpoints")
    if gamma is not None and gamma <= 0:
        raise ConfigError(f"RBF gamma must be > 0, got {gamma}")
    if trajectory.normalized:
        z, stats = trajectory.checkpoints, trajectory.norm_stats
    else:
        stats = NormStats.from_checkpoints(trajectory.checkpoints)
        z = stats.apply(trajectory.checkpoints)

    if kernel == "rbf" and gamma is None:
        gamma = median_gamma(z)
        if gamma <= 0:
            raise DegenerateBasisError("all checkpoints coincide")
    gamma = float(gamma or 0.0)

    k = _kernel(kernel, gamma, z, z)
    col_mean = k.mean(axis=0)
    total_mean = float(k.mean())
    centered = k - col_mean[None, :] - col_mean[:, None] + total_mean
    values, vectors = symmetric_eigen(0.5 * (centered + centered.T))
    order = np.argsort(values)[::-1][:2]
    values, vectors = values[order], vectors[:, order]
    if values[0] <= RANK_TOL or values[1] <= RANK_TOL * values[0]:
        raise DegenerateBasisError(f"centered kernel has fewer than two positive eigenvalues ({values})")
    alphas = vectors / np.sqrt(values)

    codes = centered @ alphas
    center, half = fit_scale(codes)
    latent = (codes - center) / half
    inverse_gamma, coef, target_mean = _fit_inverse(latent, z, ridge)
    recon = target_mean + np.exp(-inverse_gamma * pairwise_sq_dists(latent, latent)) @ coef
    residuals = np.linalg.norm(recon - z, axis=1)
    logger.info("Kernel-PCA (%s, gamma=%.4g): mean inverse-fit residual %.4g", kernel, gamma, float(residuals.mean()))

    return KpcaModel(
        spec=trajectory.spec,
        norm_stats=stats,
        kernel=kernel,
        gamma=gamma,
        support=z,
        alphas=alphas,
        kernel_col_mean=col_mean,
        kernel_mean=total_mean,
        center=center,
        half=half,
        inverse_gamma=inverse_gamma,
        latent_codes=latent,
        inverse_coef=coef,
        target_mean=target_mean,
        fit_residuals=residuals,
    )


def kpca_encode(model: KpcaModel, params: Union[FlatParams, np.ndarray]) -> np.ndarray:
    theta = params.theta if isinstance(params, FlatParams) else np.asarray(params, dtype=np.float64)
    return model.encode_normalized(model.norm_stats.apply(theta))


def kpca_decode(model: KpcaModel, latent) -> FlatParams:
    return FlatParams(model.spec, model.norm_stats.invert(model.decode_normalized(latent)))


_ARRAYS = ("support", "alphas", "kernel_col_mean", "center", "half", "latent_codes",
           "inverse_coef", "target_mean", "fit_residuals")


def save_kpca(path: Union[str, Path], model: KpcaModel) -> Path:
    header = {
        "spec": model.spec.model_dump(mode="json"),
        "kernel": model.kernel,
        "gamma": model.gamma,
        "inverse_gamma": model.inverse_gamma,
        "kernel_mean": model.kernel_mean,
        "norm_floored": norm_header(model.norm_stats),
    }
    arrays = [(name, getattr(model, name)) for name in _ARRAYS]
    arrays += [("norm_mean", model.norm_stats.mean), ("norm_std", model.norm_stats.std)]
    return write_container(path, SectionTag.KPCA, header, arrays)


def load_kpca(path: Union[str, Path]) -> KpcaModel:
    header, arrays = read_container(path, SectionTag.KPCA)
    return KpcaModel(
        spec=MlpSpec.model_validate(header["spec"]),
        norm_stats=norm_from_arrays(arrays["norm_mean"], arrays["norm_std"], header["norm_floored"]),
        kernel=header["kernel"],
        gamma=header["gamma"],
        kernel_mean=header["kernel_mean"],
        inverse_gamma=header["inverse_gamma"],
        **{name: arrays[name] for name in _ARRAYS},
    )
