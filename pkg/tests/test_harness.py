import math

import numpy as np
import pytest

from errors import FormatError, InvalidInputError, ShapeError
from harness.balancing import BalancingHistory, compute_weights
from harness.nvtj import pack_container, unpack_container
from harness.storage import load_trajectory, save_trajectory
from harness.training import run_training
from harness.trajectory import Segment, Trajectory, denormalize, merge_trajectories, normalize
from models import SchemeKind, SectionTag
from numerics.mlp import init_params
from oracles import build_problem
from schemas import BalancingScheme, ConvectionConfig, MlpSpec

CONVECTION_TERMS = ("L_r", "L_ic", "L_bc")


def history_with_losses(*rows):
    history = BalancingHistory(CONVECTION_TERMS, "L_r")
    history.losses.extend(np.asarray(r, dtype=np.float64) for r in rows)
    return history


def test_dwa_equal_ratios_give_equal_weights():
    history = history_with_losses([1.0, 2.0, 3.0], [0.5, 1.0, 1.5])
    weights = compute_weights(BalancingScheme(kind=SchemeKind.DWA), history, epoch=2)
    np.testing.assert_allclose(weights, [1.0, 1.0, 1.0])


def test_dwa_starts_with_unit_weights():
    history = history_with_losses([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(compute_weights(BalancingScheme(kind=SchemeKind.DWA), history, 0), np.ones(3))


@pytest.mark.parametrize("epoch", [0, 1, 5, 17])
def test_rlw_weights_sum_to_term_count(epoch):
    weights = compute_weights(BalancingScheme(kind=SchemeKind.RLW), history_with_losses(), epoch, seed=3)
    assert weights.sum() == pytest.approx(3.0)
    assert np.all(weights > 0)


def test_constant_weights():
    scheme = BalancingScheme(kind=SchemeKind.CW)
    np.testing.assert_array_equal(compute_weights(scheme, history_with_losses(), 0), [1.0, 100.0, 100.0])


def test_lr_annealing_moving_average_by_hand():
    history = BalancingHistory(("L_r", "L_ic"), "L_r")
    scheme = BalancingScheme(kind=SchemeKind.LR_ANNEALING, lr_annealing_alpha=0.9)

    history.grad_max_abs.append(np.array([4.0, 9.0]))
    history.grad_mean_abs.append(np.array([1.0, 0.5]))
    first = compute_weights(scheme, history, 0)
    np.testing.assert_allclose(first, [1.0, 0.9 + 0.1 * 4.0 / 0.5])
    history.weights.append(first)

    history.grad_max_abs.append(np.array([2.0, 9.0]))
    history.grad_mean_abs.append(np.array([1.0, 0.25]))
    second = compute_weights(scheme, history, 1)
    np.testing.assert_allclose(second, [1.0, 0.9 * 1.7 + 0.1 * 2.0 / 0.25])


def test_gradnorm_weights_stay_normalized():
    history = BalancingHistory(("L_r", "L_ic"), "L_r")
    scheme = BalancingScheme(kind=SchemeKind.GRADNORM)
    history.record([1.0, 2.0], [np.array([1.0, 0.0]), np.array([0.0, 3.0])])
    weights = compute_weights(scheme, history, 0)
    history.weights.append(weights)
    history.record([0.5, 1.9], [np.array([0.5, 0.0]), np.array([0.0, 2.0])])
    weights = compute_weights(scheme, history, 1)
    assert weights.sum() == pytest.approx(2.0)
    assert np.all(weights >= 0)


@pytest.mark.parametrize("kind", list(SchemeKind))
def test_single_term_problem_always_trains_with_weight_one(kind):
    history = BalancingHistory(("MSE",), "MSE")
    history.record([0.3], [np.array([0.1, -0.2])])
    np.testing.assert_array_equal(compute_weights(BalancingScheme(kind=kind), history, 0), [1.0])


@pytest.mark.parametrize("epochs, stride", [(20, 3), (30, 3), (7, 10), (12, 1)])
def test_checkpoint_count(toy_problem, epochs, stride):
    net = init_params(toy_problem.default_spec(), seed=0)
    traj = run_training(toy_problem, net, BalancingScheme(), epochs, 1e-2, stride, seed=0)
    assert traj.count == math.ceil(epochs / stride) + 1
    assert traj.epochs[0] == 0 and traj.epochs[-1] == epochs


def test_recorded_losses_equal_oracle_reevaluation(toy_problem, toy_trajectory):
    oracles = toy_problem.register_oracles()
    for i in range(toy_trajectory.count):
        net = toy_trajectory.checkpoint(i)
        for name, values in toy_trajectory.losses.items():
            assert values[i] == oracles[name](net)


def test_training_is_deterministic(toy_problem):
    net = init_params(toy_problem.default_spec(), seed=5)
    a = run_training(toy_problem, net, BalancingScheme(kind=SchemeKind.RLW), 15, 1e-2, 4, seed=9)
    b = run_training(toy_problem, net, BalancingScheme(kind=SchemeKind.RLW), 15, 1e-2, 4, seed=9)
    np.testing.assert_array_equal(a.checkpoints, b.checkpoints)
    assert a.digest() == b.digest()


def test_single_term_problem_trains_identically_under_every_scheme(toy_problem):
    net = init_params(toy_problem.default_spec(), seed=6)
    reference = run_training(toy_problem, net, BalancingScheme(), 20, 1e-2, 5, seed=2)
    for kind in SchemeKind:
        traj = run_training(toy_problem, net, BalancingScheme(kind=kind), 20, 1e-2, 5, seed=2)
        np.testing.assert_array_equal(traj.checkpoints, reference.checkpoints)
        for name, values in reference.losses.items():
            np.testing.assert_array_equal(traj.losses[name], values)


def test_training_reduces_toy_loss(toy_trajectory):
    assert toy_trajectory.losses["MSE"][-1] < toy_trajectory.losses["MSE"][0]


@pytest.mark.parametrize("kind", list(SchemeKind))
def test_every_scheme_trains_convection(kind):
    problem = build_problem(ConvectionConfig(n_residual=16, n_initial=8, n_boundary=8, test_resolution=3,
                                             hidden_sizes=(4,)))
    net = init_params(problem.default_spec(), seed=1)
    traj = run_training(problem, net, BalancingScheme(kind=kind), 6, 1e-3, 2, seed=1)
    assert traj.count == 4
    assert all(np.all(np.isfinite(v)) for v in traj.losses.values())


def two_point_trajectory():
    spec = MlpSpec(layer_sizes=(1, 1))
    return Trajectory(spec=spec, checkpoints=[[1.0, 5.0], [3.0, 5.0]], epochs=(0, 1), losses={}, stride=1)


def test_normalize_two_checkpoints_by_hand():
    traj, stats = normalize(two_point_trajectory())
    np.testing.assert_allclose(traj.checkpoints[:, 0], [-1.0, 1.0])
    np.testing.assert_array_equal(traj.checkpoints[:, 1], [0.0, 0.0])
    assert stats.floored.tolist() == [False, True]
    assert traj.d_max == pytest.approx(2.0)


def test_normalize_round_trip(planar_trajectory):
    traj, stats = normalize(planar_trajectory)
    for i in range(traj.count):
        back = denormalize(stats, traj.checkpoints[i], traj.spec)
        assert np.max(np.abs(back.theta - planar_trajectory.checkpoints[i])) < 1e-12


def test_normalize_rejects_closed_trajectory():
    spec = MlpSpec(layer_sizes=(1, 1))
    traj = Trajectory(spec=spec, checkpoints=[[1.0, 0.0], [2.0, 1.0], [1.0, 0.0]], epochs=(0, 1, 2),
                      losses={}, stride=1)
    with pytest.raises(InvalidInputError):
        normalize(traj)


def test_trajectory_validation():
    spec = MlpSpec(layer_sizes=(1, 1))
    with pytest.raises(InvalidInputError):
        Trajectory(spec=spec, checkpoints=[[1.0, 0.0]], epochs=(0,), losses={}, stride=1)
    with pytest.raises(ShapeError):
        Trajectory(spec=spec, checkpoints=[[1.0], [2.0]], epochs=(0, 1), losses={}, stride=1)
    with pytest.raises(InvalidInputError):
        Trajectory(spec=spec, checkpoints=np.zeros((3, 2)), epochs=(0, 1, 2), losses={}, stride=1,
                   segments=(Segment("a", 0, 1), Segment("b", 2, 3)))


def test_save_load_is_bit_identical(tmp_path, toy_trajectory):
    path = save_trajectory(tmp_path / "traj.nvtj", toy_trajectory)
    loaded = load_trajectory(path)
    assert loaded.spec == toy_trajectory.spec
    assert loaded.checkpoints.tobytes() == toy_trajectory.checkpoints.tobytes()
    assert loaded.epochs == toy_trajectory.epochs
    for name, values in toy_trajectory.losses.items():
        assert loaded.losses[name].tobytes() == values.tobytes()


def test_loaded_file_carries_its_own_layout(tmp_path, planar_trajectory):
    loaded = load_trajectory(save_trajectory(tmp_path / "planar.nvtj", planar_trajectory))
    assert loaded.spec.layer_sizes == (1, 4, 1)


def test_truncated_file_names_lengths(tmp_path, toy_trajectory):
    path = save_trajectory(tmp_path / "traj.nvtj", toy_trajectory)
    data = path.read_bytes()
    path.write_bytes(data[:-5])
    with pytest.raises(FormatError) as info:
        load_trajectory(path)
    assert info.value.expected == len(data)
    assert info.value.actual == len(data) - 5


def test_container_header_errors():
    blob = pack_container(SectionTag.PCA, {"k": 1}, [("a", np.arange(3.0))])
    with pytest.raises(FormatError) as info:
        unpack_container(b"XXXX" + blob[4:], SectionTag.PCA)
    assert info.value.offset == 0
    with pytest.raises(FormatError) as info:
        unpack_container(blob, SectionTag.KPCA)
    assert info.value.offset == 8
    header, arrays = unpack_container(blob, SectionTag.PCA)
    assert header["k"] == 1
    np.testing.assert_array_equal(arrays["a"], [0.0, 1.0, 2.0])


def test_merge_trajectories(toy_problem):
    net = init_params(toy_problem.default_spec(), seed=2)
    a = run_training(toy_problem, net, BalancingScheme(), 6, 1e-2, 3, seed=1)
    b = run_training(toy_problem, net, BalancingScheme(kind=SchemeKind.RLW), 9, 1e-2, 3, seed=2)
    merged = merge_trajectories([a, b], ["ew", "rlw"])
    assert merged.count == a.count + b.count
    assert merged.segments == (Segment("ew", 0, a.count), Segment("rlw", a.count, a.count + b.count))
    np.testing.assert_array_equal(merged.losses["MSE"][a.count:], b.losses["MSE"])
    assert set(merged.scheme) == {"ew", "rlw"}
    with pytest.raises(InvalidInputError):
        merge_trajectories([a, b], ["same", "same"])
