"""
Shared fixtures: small problems, tiny networks and hand-built trajectories
"""
import numpy as np
import pytest

from config import settings
from harness.trajectory import Trajectory
from numerics.mlp import FlatParams, init_params
from numerics.rng import stream
from oracles import build_problem
from schemas import ConvectionConfig, MlpSpec, ToyConfig


@pytest.fixture
def toy_problem():
    return build_problem(ToyConfig(n_train=16, n_test=16, hidden_sizes=(4,), seed=1))


@pytest.fixture
def convection_problem():
    return build_problem(ConvectionConfig(n_residual=24, n_initial=12, n_boundary=12, test_resolution=5,
                                          hidden_sizes=(5,), beta=10.0, seed=2))


@pytest.fixture
def small_net():
    """Random 2-8-1 tanh network"""
    return init_params(MlpSpec(layer_sizes=(2, 8, 1)), seed=7)


def planar_checkpoints(spec: MlpSpec, count: int = 6, seed: int = 0) -> np.ndarray:
    """Checkpoints on a 2-plane through the last one: origin + a u + b v"""
    rng = stream(seed, "planar")
    n = spec.parameter_count
    origin = rng.standard_normal(n)
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    coords = np.column_stack([np.linspace(1.0, 0.0, count), np.sin(np.linspace(0.0, 3.0, count))])
    coords[-1] = 0.0
    return origin + coords[:, :1] * u + coords[:, 1:] * v


@pytest.fixture
def toy_spec():
    return MlpSpec(layer_sizes=(1, 4, 1))


@pytest.fixture
def planar_trajectory(toy_spec):
    checkpoints = planar_checkpoints(toy_spec)
    count = checkpoints.shape[0]
    return Trajectory(
        spec=toy_spec,
        checkpoints=checkpoints,
        epochs=tuple(range(0, 10 * count, 10)),
        losses={"L_test": np.linspace(1.0, 0.1, count)},
        stride=10,
    )


@pytest.fixture
def toy_trajectory(toy_problem):
    """Short real training run on the toy regression problem"""
    from harness.training import run_training
    from schemas import BalancingScheme

    net = init_params(toy_problem.default_spec(), seed=3)
    return run_training(toy_problem, net, BalancingScheme(), epochs=30, lr=1e-2, stride=3, seed=3)


@pytest.fixture
def smoke_scale(monkeypatch):
    monkeypatch.setattr(settings, "RECIPE_SCALE", "smoke")
    return settings


def flat(spec: MlpSpec, theta) -> FlatParams:
    return FlatParams(spec, np.asarray(theta, dtype=np.float64))
