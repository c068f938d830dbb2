"""
The encode/decode interface shared by the visualizer and the baselines
"""
from pathlib import Path
from typing import Protocol, Union, runtime_checkable

import numpy as np

from baselines.kpca import load_kpca, save_kpca
from baselines.pca import load_pca, save_pca
from errors import ConfigError
from harness.trajectory import NormStats
from models import Method
from schemas import MlpSpec
from visualizer.model import load_visualizer, save_visualizer


@runtime_checkable
class Projector(Protocol):
    method: Method
    spec: MlpSpec
    norm_stats: NormStats

    def encode_normalized(self, z: np.ndarray) -> np.ndarray:
        ...

    def decode_normalized(self, latent: np.ndarray) -> np.ndarray:
        ...


def decode_raw(model: Projector, latent: np.ndarray) -> np.ndarray:
    """Decoded raw parameter vectors, one row per latent point"""
    return model.norm_stats.invert(model.decode_normalized(np.atleast_2d(latent)))


def save_projector(path: Union[str, Path], model: Projector) -> Path:
    savers = {Method.VISUALIZER: save_visualizer, Method.PCA: save_pca, Method.KPCA: save_kpca}
    return savers[model.method](path, model)


def load_projector(path: Union[str, Path], method: Method) -> Projector:
    loaders = {Method.VISUALIZER: load_visualizer, Method.PCA: load_pca, Method.KPCA: load_kpca}
    try:
        method = Method(method)
    except ValueError:
        raise ConfigError(f"unknown projection method {method!r}") from None
    return loaders[method](path)


def encode_raw(model: Projector, theta: np.ndarray) -> np.ndarray:
    """Latent codes of raw parameter vectors, one row per vector"""
    return model.encode_normalized(model.norm_stats.apply(np.atleast_2d(theta)))
