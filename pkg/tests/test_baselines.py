import numpy as np
import pytest

from baselines.common import GRID_MARGIN, fit_scale, median_gamma
from baselines.kpca import fit_kpca, kpca_decode, kpca_encode, load_kpca, save_kpca
from baselines.pca import fit_pca, load_pca, pca_decode, pca_encode, save_pca
from errors import ConfigError, DegenerateBasisError, InvalidInputError
from harness.trajectory import Trajectory, normalize
from numerics.rng import stream
from schemas import MlpSpec

TEN_PARAMS = MlpSpec(layer_sizes=(1, 3, 1))


def random_trajectory(count=5, seed=0, spec=TEN_PARAMS):
    checkpoints = stream(seed, "random-traj").standard_normal((count, spec.parameter_count))
    return Trajectory(spec=spec, checkpoints=checkpoints, epochs=tuple(range(count)), losses={}, stride=1)


def test_planar_trajectory_reconstructs_exactly(planar_trajectory):
    traj, _ = normalize(planar_trajectory)
    plane = fit_pca(traj)
    recon = plane.decode_normalized(plane.encode_normalized(traj.checkpoints))
    assert np.max(np.abs(recon - traj.checkpoints)) < 1e-10
    raw = pca_decode(plane, pca_encode(plane, planar_trajectory.checkpoint(2)))
    np.testing.assert_allclose(raw.theta, planar_trajectory.checkpoints[2], atol=1e-9)


def test_projection_matches_svd():
    traj = random_trajectory()
    plane = fit_pca(traj)
    z = plane.norm_stats.apply(traj.checkpoints)
    _, _, vt = np.linalg.svd(z - z.mean(axis=0))
    top = vt[:2]
    expected = z[-1] + (z - z[-1]) @ top.T @ top
    recon = plane.decode_normalized(plane.encode_normalized(z))
    assert np.max(np.abs(recon - expected)) < 1e-8


def test_basis_is_orthonormal_and_projection_idempotent():
    plane = fit_pca(random_trajectory(count=7, seed=3))
    np.testing.assert_allclose(plane.basis @ plane.basis.T, np.eye(2), atol=1e-12)
    z = stream(1, "probe").standard_normal((4, TEN_PARAMS.parameter_count))
    once = plane.encode_normalized(z)
    twice = plane.encode_normalized(plane.decode_normalized(once))
    assert np.max(np.abs(once - twice)) < 1e-10


def test_trajectory_codes_fit_inside_the_window():
    traj = random_trajectory(count=8, seed=4)
    plane = fit_pca(traj)
    latent = pca_encode(plane, traj.checkpoints)
    assert np.max(np.abs(latent)) == pytest.approx(1.0 / GRID_MARGIN)


def test_final_checkpoint_is_the_origin():
    traj = random_trajectory(count=6, seed=2)
    plane = fit_pca(traj)
    np.testing.assert_allclose(plane.decode_normalized(plane.encode_normalized(plane.origin)), plane.origin,
                               atol=1e-12)


def test_collinear_checkpoints_are_degenerate():
    direction = stream(0, "dir").standard_normal(TEN_PARAMS.parameter_count)
    offset = stream(0, "offset").standard_normal(TEN_PARAMS.parameter_count)
    checkpoints = offset + np.outer([0.0, 0.3, 1.1, 2.0], direction)
    traj = Trajectory(spec=TEN_PARAMS, checkpoints=checkpoints, epochs=(0, 1, 2, 3), losses={}, stride=1)
    with pytest.raises(DegenerateBasisError):
        fit_pca(traj)


def test_pca_needs_three_checkpoints():
    with pytest.raises(InvalidInputError):
        fit_pca(random_trajectory(count=2))


def test_fit_scale():
    codes = np.array([[0.0, 2.0], [4.0, -2.0], [1.0, 0.0]])
    center, half = fit_scale(codes)
    np.testing.assert_allclose(center, [2.0, 0.0])
    np.testing.assert_allclose(half, [2.2, 2.2])


def test_median_gamma():
    points = np.array([[0.0], [1.0], [3.0]])
    # pairwise distances 1, 3, 2 -> median 2
    assert median_gamma(points) == pytest.approx(1.0 / 8.0)
    assert median_gamma(np.zeros((3, 2))) == 0.0


def test_linear_kernel_reproduces_pca_codes():
    traj = random_trajectory(count=6, seed=7)
    pca_codes = pca_encode(fit_pca(traj), traj.checkpoints)
    kpca_codes = kpca_encode(fit_kpca(traj, kernel="linear"), traj.checkpoints)
    for j in range(2):
        same = np.max(np.abs(kpca_codes[:, j] - pca_codes[:, j]))
        flipped = np.max(np.abs(kpca_codes[:, j] + pca_codes[:, j]))
        assert min(same, flipped) < 1e-6


def test_kpca_round_trip_is_bounded_by_fit_residuals(planar_trajectory):
    traj, _ = normalize(planar_trajectory)
    model = fit_kpca(traj)
    recon = model.decode_normalized(model.encode_normalized(traj.checkpoints))
    np.testing.assert_allclose(np.linalg.norm(recon - traj.checkpoints, axis=1), model.fit_residuals, atol=1e-6)
    assert model.fit_residuals.shape == (traj.count,)
    decoded = kpca_decode(model, model.encode_normalized(traj.checkpoints[0]))
    assert decoded.spec == planar_trajectory.spec


def test_kpca_handles_duplicate_checkpoints():
    base = random_trajectory(count=5, seed=9)
    checkpoints = np.vstack([base.checkpoints[:3], base.checkpoints[2:3], base.checkpoints[3:]])
    traj = Trajectory(spec=TEN_PARAMS, checkpoints=checkpoints, epochs=tuple(range(6)), losses={}, stride=1)
    model = fit_kpca(traj)
    codes = model.encode_normalized(model.support)
    np.testing.assert_allclose(codes[2], codes[3], atol=1e-12)


def test_kpca_rejects_bad_settings():
    traj = random_trajectory()
    with pytest.raises(ConfigError):
        fit_kpca(traj, gamma=-1.0)
    with pytest.raises(ConfigError):
        fit_kpca(traj, kernel="poly")
    with pytest.raises(InvalidInputError):
        fit_kpca(random_trajectory(count=2))


def test_baselines_save_and_load(tmp_path):
    traj = random_trajectory(count=6, seed=11)
    z = stream(2, "probe").standard_normal((3, TEN_PARAMS.parameter_count))

    plane = fit_pca(traj)
    loaded = load_pca(save_pca(tmp_path / "pca.nvtj", plane))
    np.testing.assert_array_equal(loaded.encode_normalized(z), plane.encode_normalized(z))

    model = fit_kpca(traj)
    loaded = load_kpca(save_kpca(tmp_path / "kpca.nvtj", model))
    np.testing.assert_array_equal(loaded.encode_normalized(z), model.encode_normalized(z))
    latent = np.array([[0.1, -0.3]])
    np.testing.assert_array_equal(loaded.decode_normalized(latent), model.decode_normalized(latent))
