import json
import math
from dataclasses import replace

import numpy as np
import pytest

from baselines.pca import fit_pca
from errors import ConfigError, OracleNotFoundError, ShapeError
from harness.trajectory import Trajectory, normalize
from landscape.cka import cka, cka_result
from landscape.density import density_grid, density_values, near_trajectory_density
from landscape.export import grid_to_csv, grid_to_dict, grid_to_json, load_grid, write_grid
from landscape.fidelity import error_grid, fidelity
from landscape.grid import evaluate_grid, mesh
from landscape.projectors import Projector, decode_raw, load_projector, save_projector
from models import ErrorKind, Method
from numerics.mlp import FlatParams, hidden_features
from numerics.rng import stream
from oracles.base import LossOracle
from schemas import GridSpec, VisualizerConfig
from visualizer.training import train_visualizer

SQUARED_NORM = LossOracle("L_test", lambda net: float(np.sum(net.theta ** 2)))


def with_oracle_losses(trajectory, oracle=SQUARED_NORM):
    values = [oracle(trajectory.checkpoint(i)) for i in range(trajectory.count)]
    return replace(trajectory, losses={oracle.name: values})


@pytest.fixture
def plane(planar_trajectory):
    return fit_pca(normalize(planar_trajectory)[0])


def test_mesh_order():
    xs, ys, points = mesh(GridSpec(resolution=3, window=(0.0, 1.0, -1.0, 0.0)))
    np.testing.assert_array_equal(xs, [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(points[:3], [[0.0, -1.0], [0.5, -1.0], [1.0, -1.0]])
    np.testing.assert_array_equal(points[3], [0.0, -0.5])


def test_resolution_three_grid_by_hand(plane):
    grid = evaluate_grid(plane, GridSpec(resolution=3), SQUARED_NORM)
    assert grid.values.shape == (3, 3)
    for iy, y in enumerate([-1.0, 0.0, 1.0]):
        for ix, x in enumerate([-1.0, 0.0, 1.0]):
            coeffs = np.array([x, y]) * plane.half + plane.center
            theta = plane.norm_stats.invert(plane.origin + coeffs @ plane.basis)
            assert grid.values[iy, ix] == pytest.approx(np.sum(theta ** 2), rel=1e-12)


def test_constant_oracle_gives_constant_field(plane):
    grid = evaluate_grid(plane, GridSpec(resolution=4), LossOracle("c", lambda net: 2.5))
    assert np.all(grid.values == 2.5)
    assert grid.finite_range == (2.5, 2.5)


def test_overlay_carries_recorded_losses(plane, planar_trajectory):
    traj = with_oracle_losses(planar_trajectory)
    grid = evaluate_grid(plane, GridSpec(resolution=3), SQUARED_NORM, traj)
    assert grid.overlay_values.tobytes() == traj.losses["L_test"].tobytes()
    assert grid.overlay_points.shape == (traj.count, 2)
    assert grid.overlay_name == "L_test"
    assert grid.segments == (("run", 0, traj.count),)


def test_missing_recorded_oracle(plane, planar_trajectory):
    with pytest.raises(OracleNotFoundError):
        evaluate_grid(plane, GridSpec(resolution=2), LossOracle("L_r", lambda net: 0.0), planar_trajectory)


def test_failed_points_become_nan(plane):
    def flaky(net):
        if net.theta[0] > plane.norm_stats.mean[0]:
            raise ArithmeticError("overflow")
        return 1.0

    grid = evaluate_grid(plane, GridSpec(resolution=5), LossOracle("flaky", flaky))
    assert grid.failed_points == int(np.isnan(grid.values).sum())
    assert 0 < grid.failed_points < 25


def test_parallel_evaluation_matches_serial(plane):
    spec = GridSpec(resolution=4)
    serial = evaluate_grid(plane, spec, SQUARED_NORM, workers=1)
    threaded = evaluate_grid(plane, spec, SQUARED_NORM, workers=3)
    np.testing.assert_array_equal(serial.values, threaded.values)


def test_projectors_share_one_interface(tmp_path, plane):
    assert isinstance(plane, Projector)
    loaded = load_projector(save_projector(tmp_path / "pca.nvtj", plane), Method.PCA)
    latent = np.array([[0.2, 0.4]])
    np.testing.assert_array_equal(decode_raw(loaded, latent), decode_raw(plane, latent))
    with pytest.raises(ConfigError):
        load_projector(tmp_path / "pca.nvtj", "umap")


def test_cka_properties():
    a = stream(0, "feat-a").standard_normal((20, 5))
    q, _ = np.linalg.qr(stream(0, "rot").standard_normal((5, 5)))
    assert cka(a, a) == pytest.approx(1.0)
    assert cka(a, 3.0 * a @ q) == pytest.approx(1.0)
    b = stream(0, "feat-b").standard_normal((20, 3))
    assert 0.0 <= cka(a, b) <= 1.0
    assert cka(a, b) == pytest.approx(cka(b, a))


def test_cka_degenerate_and_shape():
    a = stream(0, "feat-a").standard_normal((6, 2))
    result = cka_result(a, np.ones((6, 3)))
    assert result.value == 0.0 and result.degenerate
    with pytest.raises(ShapeError):
        cka(a, a[:4])


def test_density_matches_double_loop(plane):
    probe = stream(0, "probe").uniform(-1, 1, (10, 1))
    _, _, points = mesh(GridSpec(resolution=3))
    thetas = decode_raw(plane, points)
    feats = [hidden_features(FlatParams(plane.spec, t), probe) for t in thetas]
    expected = [sum(cka(feats[j], feats[i]) for j in range(len(feats)) if j != i) for i in range(len(feats))]
    np.testing.assert_allclose(density_values(plane, thetas, probe), expected, atol=1e-10)


def test_density_grid(plane, planar_trajectory):
    probe = stream(1, "probe").uniform(-1, 1, (8, 1))
    grid = density_grid(plane, GridSpec(resolution=3), probe, planar_trajectory)
    assert grid.field_name == "cka_density"
    assert grid.values.shape == (3, 3)
    assert np.all(grid.values >= 0) and np.all(grid.values <= 8 + 1e-9)
    assert grid.overlay_points.shape == (planar_trajectory.count, 2)
    with pytest.raises(ConfigError):
        density_grid(plane, GridSpec(resolution=5), probe, max_resolution=4)


def test_planar_fidelity_is_exact(plane, planar_trajectory):
    report = fidelity(plane, with_oracle_losses(planar_trajectory), SQUARED_NORM)
    assert report.method == "pca"
    assert report.e_relative < 1e-8
    assert report.e_proj < 1e-8
    assert len(report.projection_distances) == planar_trajectory.count


def test_off_plane_fidelity(toy_spec):
    checkpoints = stream(3, "off-plane").standard_normal((6, toy_spec.parameter_count))
    traj = with_oracle_losses(Trajectory(spec=toy_spec, checkpoints=checkpoints, epochs=tuple(range(6)),
                                         losses={}, stride=1))
    normalized, _ = normalize(traj)
    report = fidelity(fit_pca(normalized), traj, SQUARED_NORM)
    assert report.e_proj > 0
    assert report.d_max == pytest.approx(normalized.d_max)
    expected = np.mean(report.projection_distances) / report.d_max
    assert report.e_proj == pytest.approx(expected)


def test_error_grid_overlays(plane, planar_trajectory):
    traj = with_oracle_losses(planar_trajectory)
    grid = error_grid(plane, traj, SQUARED_NORM, ErrorKind.PARAM_DISTANCE, GridSpec(resolution=3))
    assert grid.overlay_name == "param_distance"
    assert grid.field_name == "L_test"
    assert np.all(grid.overlay_values < 1e-8)
    grid = error_grid(plane, traj, SQUARED_NORM, "loss_error", GridSpec(resolution=3))
    assert grid.overlay_name == "loss_error"


def test_json_export_round_trip(tmp_path, plane, planar_trajectory):
    traj = with_oracle_losses(planar_trajectory)
    grid = evaluate_grid(plane, GridSpec(resolution=3), SQUARED_NORM, traj)
    values = grid.values.copy()
    values[0, 0] = math.nan
    grid = replace(grid, values=values)

    data = json.loads(grid_to_json(grid))
    assert data["field"][0][0] is None
    loaded = load_grid(write_grid(tmp_path / "g.json", grid))
    np.testing.assert_array_equal(loaded.values, grid.values)
    np.testing.assert_array_equal(loaded.overlay_points, grid.overlay_points)
    assert loaded.overlay_values.tobytes() == grid.overlay_values.tobytes()
    assert loaded.segments == grid.segments
    assert grid_to_dict(loaded) == grid_to_dict(grid)


def test_csv_export(plane):
    grid = evaluate_grid(plane, GridSpec(resolution=2), LossOracle("c", lambda net: 0.1))
    lines = grid_to_csv(grid).splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 5
    assert lines[1] == "-1.0,-1.0,0.1"
    assert lines[2] == "1.0,-1.0,0.1"


def test_near_trajectory_density_averages_mesh_points_by_the_overlay(plane, planar_trajectory):
    probe = stream(1, "probe").uniform(-1, 1, (8, 1))
    grid = replace(density_grid(plane, GridSpec(resolution=3), probe, planar_trajectory),
                   overlay_points=np.array([[-1.0, -1.0], [0.05, 0.0]]))
    expected = np.mean([grid.values[0, 0], grid.values[1, 1]])
    assert near_trajectory_density(grid) == pytest.approx(expected)
    far = replace(grid, overlay_points=np.array([[0.5, 0.5]]))
    assert math.isnan(near_trajectory_density(far))
    with pytest.raises(ConfigError):
        near_trajectory_density(replace(grid, overlay_points=np.zeros((0, 2))))


@pytest.mark.slow
def test_visualizer_reconstructs_a_planar_trajectory(planar_trajectory):
    traj = with_oracle_losses(planar_trajectory)
    config = VisualizerConfig(hidden_sizes=(32,), epochs=10000, lr=1e-3, batch_size=8, c_rec=1.0, seed=0)
    model, _ = train_visualizer(normalize(traj)[0], config)
    assert fidelity(model, traj, SQUARED_NORM).e_proj < 1e-2


@pytest.mark.slow
def test_larger_l_max_packs_similar_networks_near_the_trajectory(toy_problem, toy_trajectory):
    traj, _ = normalize(toy_trajectory)
    probe = toy_problem.probe_inputs(32, 0)
    near = {}
    for l_max in (2.0, 8.0):
        config = VisualizerConfig(hidden_sizes=(32, 16), epochs=5000, lr=1e-3, batch_size=16, c_rec=1.0,
                                  c_grid=1.0, l_max=l_max, seed=0)
        model, _ = train_visualizer(traj, config)
        near[l_max] = near_trajectory_density(density_grid(model, GridSpec(resolution=11), probe, traj))
    assert near[8.0] > near[2.0]
