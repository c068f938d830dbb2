"""
Pydantic schemas for configs, containers and reports
"""
import math
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models import Activation, AnchorMode, EigenVariant, LevelSpacing, Method, SchemeKind


# Network Schemas
class MlpSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    layer_sizes: Tuple[int, ...]
    hidden_activation: Activation = Activation.TANH
    output_activation: Activation = Activation.IDENTITY

    @field_validator("layer_sizes")
    @classmethod
    def check_sizes(cls, sizes):
        if len(sizes) < 2:
            raise ValueError("an MLP needs at least an input and an output layer")
        if any(size < 1 for size in sizes):
            raise ValueError(f"layer sizes must be >= 1, got {sizes}")
        return sizes

    @field_validator("hidden_activation")
    @classmethod
    def check_hidden(cls, activation):
        if activation is not Activation.TANH:
            raise ValueError("hidden layers only support tanh")
        return activation

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    @property
    def weight_shapes(self) -> List[Tuple[int, int]]:
        return [(n_out, n_in) for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:])]

    @property
    def parameter_count(self) -> int:
        return sum(o * i + o for o, i in self.weight_shapes)


# Problem Schemas
class ConvectionConfig(BaseModel):
    kind: Literal["convection"] = "convection"
    beta: float = Field(10.0, ge=0.0)
    n_residual: int = Field(1000, ge=1)
    n_initial: int = Field(100, ge=1)
    n_boundary: int = Field(100, ge=1)
    test_resolution: int = Field(64, ge=2)
    c_r: float = Field(1.0, ge=0.0)
    c_ic: float = Field(1.0, ge=0.0)
    c_bc: float = Field(1.0, ge=0.0)
    hidden_sizes: Tuple[int, ...] = (32, 32)
    seed: int = 0


class EigenConfig(BaseModel):
    kind: Literal["eigen"] = "eigen"
    dimension: int = Field(4, ge=2)
    n_labeled: int = Field(32, ge=1)
    n_unlabeled: int = Field(64, ge=0)
    n_test: int = Field(64, ge=1)
    variant: EigenVariant = EigenVariant.COPHY
    c_C: float = Field(1.0, ge=0.0)
    c_S: float = Field(1.0, ge=0.0)
    tau_fraction: float = Field(0.2, gt=0.0)
    total_epochs: int = Field(2000, ge=1)
    hidden_sizes: Tuple[int, ...] = (32, 32)
    seed: int = 0

    @property
    def tau(self) -> float:
        return self.tau_fraction * self.total_epochs


class ToyConfig(BaseModel):
    kind: Literal["toy"] = "toy"
    n_train: int = Field(64, ge=2)
    n_test: int = Field(128, ge=2)
    hidden_sizes: Tuple[int, ...] = (16,)
    seed: int = 0


ProblemConfig = Annotated[Union[ConvectionConfig, EigenConfig, ToyConfig], Field(discriminator="kind")]


# Training Schemas
class BalancingScheme(BaseModel):
    kind: SchemeKind = SchemeKind.EW
    constant_weights: Dict[str, float] = {"L_r": 1.0, "L_ic": 100.0, "L_bc": 100.0}
    dwa_temperature: float = Field(2.0, gt=0.0)
    lr_annealing_alpha: float = Field(0.9, ge=0.0, lt=1.0)
    gradnorm_alpha: float = Field(1.5, ge=0.0)
    gradnorm_lr: float = Field(0.025, gt=0.0)

    @field_validator("constant_weights")
    @classmethod
    def check_weights(cls, weights):
        bad = {k: v for k, v in weights.items() if not (v >= 0 and math.isfinite(v))}
        if bad:
            raise ValueError(f"constant weights must be finite and >= 0: {bad}")
        return weights


class TrainerConfig(BaseModel):
    epochs: int = Field(1000, ge=1)
    lr: float = Field(1e-3, gt=0.0)
    stride: int = Field(10, ge=1)
    seed: int = 0


class VisualizerConfig(BaseModel):
    hidden_sizes: Tuple[int, ...] = (991, 125, 15)
    lr: float = Field(5e-4, gt=0.0)
    batch_size: int = Field(32, ge=1)
    epochs: int = Field(20000, ge=1)
    c_rec: float = Field(1e4, ge=0.0)
    c_anch: float = Field(0.0, ge=0.0)
    c_traj: float = Field(0.0, ge=0.0)
    c_grid: float = Field(0.0, ge=0.0)
    anchor_mode: AnchorMode = AnchorMode.NONE
    anchor_radius: float = Field(0.8, gt=0.0, le=1.0)
    circle_count: Optional[int] = Field(None, ge=1)
    l_max: float = 2.0
    grid_samples: int = Field(64, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def check_grid_target(self):
        if self.c_grid > 0 and not self.l_max > 0:
            raise ValueError("l_max must be > 0 when c_grid > 0")
        return self


# Landscape Schemas
class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    resolution: int = Field(41, ge=2)
    window: Tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)

    @field_validator("window")
    @classmethod
    def check_window(cls, window):
        x1, x2, y1, y2 = window
        if not (-1.0 <= x1 < x2 <= 1.0 and -1.0 <= y1 < y2 <= 1.0):
            raise ValueError(f"window {window} must be an ordered sub-rectangle of [-1, 1]^2")
        return window


class FidelityReport(BaseModel):
    method: str
    oracle: str
    e_relative: float = Field(ge=0.0)
    e_proj: float = Field(ge=0.0)
    loss_errors: List[float]
    relative_errors: List[float]
    projection_distances: List[float]
    d_max: float
    normalization: str = "e_proj = mean projection distance / d_max, z-scored parameter space"


# Render Schemas
DEFAULT_COLORMAP = [(8, 29, 88), (29, 145, 192), (65, 182, 96), (237, 248, 33), (255, 255, 217)]


class RenderStyle(BaseModel):
    levels: Union[int, List[float]] = 30
    spacing: LevelSpacing = LevelSpacing.LOG
    colormap: List[Tuple[int, int, int]] = DEFAULT_COLORMAP
    marker_size: float = Field(4.0, gt=0.0)
    highlight_first: bool = True
    highlight_last: bool = True
    isolines: bool = True
    width: int = Field(480, ge=16)
    height: int = Field(480, ge=16)

    @field_validator("levels")
    @classmethod
    def check_levels(cls, levels):
        if isinstance(levels, int):
            if levels < 2:
                raise ValueError("need at least 2 contour levels")
            return levels
        if len(levels) < 2 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("explicit levels must be strictly increasing, at least 2")
        return levels

    @field_validator("colormap")
    @classmethod
    def check_colormap(cls, colors):
        if len(colors) < 5:
            raise ValueError("colormap needs at least 5 anchor colors")
        for color in colors:
            if any(not 0 <= c <= 255 for c in color):
                raise ValueError(f"invalid 8-bit RGB color {color}")
        return colors


# Experiment Schemas
class ExperimentConfig(BaseModel):
    schema_version: Literal[1] = 1
    name: str = "experiment"
    problem: ProblemConfig = Field(default_factory=ConvectionConfig)
    scheme: BalancingScheme = Field(default_factory=BalancingScheme)
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    visualizer: VisualizerConfig = Field(default_factory=VisualizerConfig)
    baselines: List[Method] = [Method.PCA, Method.KPCA]
    kpca_gamma: Optional[float] = Field(None, gt=0.0)
    oracles: List[str] = ["L_total_physics"]
    grids: List[GridSpec] = [GridSpec()]
    density_resolution: int = Field(21, ge=2)
    render: RenderStyle = Field(default_factory=RenderStyle)
    output_dir: str = "runs/experiment"
    seed: int = 0

    @field_validator("baselines")
    @classmethod
    def check_baselines(cls, methods):
        if Method.VISUALIZER in methods:
            raise ValueError("the visualizer is always fitted; list only pca/kpca as baselines")
        return methods


class ManifestEntry(BaseModel):
    path: str
    sha256: str
    stage: str


class Manifest(BaseModel):
    name: str
    config_sha256: str
    seeds: Dict[str, int]
    entries: List[ManifestEntry] = []
