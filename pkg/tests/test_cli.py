import hashlib
import json
from pathlib import Path

import pytest

from cli import cli_run, parse_window
from experiments.pipeline import MANIFEST_FILE, TRAJECTORY_FILE

SMOKE_CONFIG = {
    "name": "smoke",
    "problem": {"kind": "toy", "n_train": 16, "n_test": 16, "hidden_sizes": [4], "seed": 1},
    "trainer": {"epochs": 6, "lr": 0.01, "stride": 2, "seed": 1},
    "visualizer": {"hidden_sizes": [4], "epochs": 2, "batch_size": 4, "c_rec": 1.0, "grid_samples": 4, "seed": 1},
    "oracles": ["L_test"],
    "grids": [{"resolution": 3}],
    "density_resolution": 2,
    "render": {"levels": 5},
    "output_dir": "out",
    "seed": 1,
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(SMOKE_CONFIG), encoding="utf-8")
    return path


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_unknown_subcommand_is_a_usage_error():
    assert cli_run(["bogus"]) == 2


def test_unknown_flag_is_a_usage_error(config_path):
    assert cli_run(["fit", "--config", str(config_path), "--colour", "red"]) == 2


@pytest.mark.parametrize("window", ["0,1,0", "0,1,0,x", "1,0,0,1", "-2,0,0,1", "0,1,0,1.5"])
def test_bad_window_is_a_usage_error(config_path, window, capsys):
    assert cli_run(["landscape", "--config", str(config_path), f"--window={window}"]) == 2
    assert "--window" in capsys.readouterr().err


def test_parse_window():
    assert parse_window("-1,0.5,0,1") == (-1.0, 0.5, 0.0, 1.0)


def test_fidelity_without_fitted_models_names_the_stage(config_path, tmp_path, capsys):
    out = tmp_path / "run"
    assert cli_run(["generate", "--config", str(config_path), "--out", str(out)]) == 0
    assert (out / TRAJECTORY_FILE).exists()
    assert cli_run(["fidelity", "--out", str(out)]) == 1
    assert "[fit]" in capsys.readouterr().err


def test_missing_run_directory_fails(tmp_path, capsys):
    assert cli_run(["render", "--out", str(tmp_path / "nowhere")]) == 1
    assert "error" in capsys.readouterr().err


def test_invalid_config_fails(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"trainer": {"epochs": 0}}), encoding="utf-8")
    assert cli_run(["generate", "--config", str(path)]) == 1


def test_full_run_writes_a_hashed_manifest(config_path, tmp_path):
    out = tmp_path / "run"
    assert cli_run(["run", "--config", str(config_path), "--out", str(out)]) == 0
    manifest = json.loads((out / MANIFEST_FILE).read_text(encoding="utf-8"))
    paths = {entry["path"] for entry in manifest["entries"]}
    assert {"config.json", TRAJECTORY_FILE, "models/visualizer.nvtj", "models/pca.nvtj", "models/kpca.nvtj",
            "fidelity.json", "grids/pca__L_test__0.json", "grids/pca__L_test__0.csv",
            "grids/kpca__density.json", "svg/visualizer__L_test__0.svg"} <= paths
    for entry in manifest["entries"]:
        assert sha256(out / entry["path"]) == entry["sha256"]
    assert manifest["seeds"]["visualizer"] == 1


def test_runs_are_reproducible(config_path, tmp_path):
    for name in ("a", "b"):
        assert cli_run(["run", "--config", str(config_path), "--out", str(tmp_path / name)]) == 0
    for rel in (TRAJECTORY_FILE, "models/visualizer.nvtj", "grids/visualizer__L_test__0.json",
                "svg/pca__L_test__0.svg", "fidelity.json"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_stagewise_commands(config_path, tmp_path, capsys):
    out = tmp_path / "run"
    assert cli_run(["generate", "--config", str(config_path), "--out", str(out)]) == 0
    assert cli_run(["fit", "--out", str(out), "--method", "pca"]) == 0
    assert cli_run(["landscape", "--out", str(out), "--oracle", "MSE", "--resolution", "4",
                    "--window", "0,1,0,1", "--format", "svg"]) == 0
    assert (out / "grids" / "pca__MSE__0.json").exists()
    assert (out / "svg" / "pca__MSE__0.svg").exists()
    assert not (out / "models" / "visualizer.nvtj").exists()
    assert cli_run(["density", "--out", str(out), "--resolution", "2"]) == 0
    assert cli_run(["fidelity", "--out", str(out), "--oracle", "MSE"]) == 0
    assert "e_proj" in capsys.readouterr().out


def test_unregistered_oracle_fails(config_path, tmp_path):
    out = tmp_path / "run"
    assert cli_run(["generate", "--config", str(config_path), "--out", str(out)]) == 0
    assert cli_run(["fit", "--out", str(out), "--method", "pca"]) == 0
    assert cli_run(["landscape", "--out", str(out), "--oracle", "L_r"]) == 1
