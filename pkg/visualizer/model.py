"""
The encoder/decoder pair and its NVTJ serialization (section VISM)
"""
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from harness.nvtj import read_container, write_container
from harness.trajectory import NormStats
from models import Activation, Method, SectionTag
from numerics.mlp import FlatParams, mlp_forward
from schemas import MlpSpec, VisualizerConfig

logger = logging.getLogger(__name__)


def encoder_spec(n_params: int, hidden: Sequence[int]) -> MlpSpec:
    return MlpSpec(layer_sizes=(n_params, *hidden, 2), output_activation=Activation.TANH)


def decoder_spec(n_params: int, hidden: Sequence[int]) -> MlpSpec:
    return MlpSpec(layer_sizes=(2, *reversed(tuple(hidden)), n_params))


@dataclass(frozen=True)
class VisualizerModel:
    encoder: FlatParams
    decoder: FlatParams
    norm_stats: NormStats
    spec: MlpSpec  # layout of the target network whose parameters are embedded
    config: VisualizerConfig
    trajectory_digest: str = ""

    method = Method.VISUALIZER

    def __post_init__(self):
        enc, dec = self.encoder.spec.layer_sizes, self.decoder.spec.layer_sizes
        if enc[-1] != 2 or dec[0] != 2 or enc[0] != self.spec.parameter_count or tuple(reversed(enc)) != dec:
            raise ValueError(f"encoder {enc} and decoder {dec} do not mirror around a 2-D latent")

    def with_theta(self, encoder_theta, decoder_theta) -> "VisualizerModel":
        return replace(self, encoder=self.encoder.with_theta(encoder_theta), decoder=self.decoder.with_theta(decoder_theta))

    def encode_normalized(self, z: np.ndarray) -> np.ndarray:
        return mlp_forward(self.encoder, z)[0]

    def decode_normalized(self, latent: np.ndarray) -> np.ndarray:
        return mlp_forward(self.decoder, latent)[0]


def encode(model: VisualizerModel, params: Union[FlatParams, np.ndarray]) -> np.ndarray:
    """Latent point(s) in [-1, 1]^2 of raw parameter vector(s)"""
    theta = params.theta if isinstance(params, FlatParams) else np.asarray(params, dtype=np.float64)
    return model.encode_normalized(model.norm_stats.apply(theta))


def decode(model: VisualizerModel, latent, denormalized: bool = True) -> FlatParams:
    latent = np.asarray(latent, dtype=np.float64).reshape(2)
    if np.any(np.abs(latent) > 1.0):
        logger.warning("decoding latent %s outside [-1, 1]^2", latent)
    z = model.decode_normalized(latent)
    return FlatParams(model.spec, model.norm_stats.invert(z) if denormalized else z)


def save_visualizer(path: Union[str, Path], model: VisualizerModel) -> Path:
    header = {
        "config": model.config.model_dump(mode="json"),
        "spec": model.spec.model_dump(mode="json"),
        "encoder": model.encoder.spec.model_dump(mode="json"),
        "decoder": model.decoder.spec.model_dump(mode="json"),
        "trajectory_digest": model.trajectory_digest,
        "norm_floored": np.flatnonzero(model.norm_stats.floored).tolist(),
    }
    arrays = [
        ("encoder", model.encoder.theta),
        ("decoder", model.decoder.theta),
        ("norm_mean", model.norm_stats.mean),
        ("norm_std", model.norm_stats.std),
    ]
    return write_container(path, SectionTag.VISUALIZER, header, arrays)


def load_visualizer(path: Union[str, Path]) -> VisualizerModel:
    header, arrays = read_container(path, SectionTag.VISUALIZER)
    floored = np.zeros(arrays["norm_std"].shape, dtype=bool)
    floored[header["norm_floored"]] = True
    return VisualizerModel(
        encoder=FlatParams(MlpSpec.model_validate(header["encoder"]), arrays["encoder"]),
        decoder=FlatParams(MlpSpec.model_validate(header["decoder"]), arrays["decoder"]),
        norm_stats=NormStats(arrays["norm_mean"], arrays["norm_std"], floored),
        spec=MlpSpec.model_validate(header["spec"]),
        config=VisualizerConfig.model_validate(header["config"]),
        trajectory_digest=header["trajectory_digest"],
    )
