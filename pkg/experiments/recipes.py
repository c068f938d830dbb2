"""
Canned experiments behind `reproduce <name>`

Every recipe writes one sub-run per panel under its output directory plus a
summary.json with the numbers the panels are compared on.
"""
import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from config import settings
from errors import ConfigError
from experiments.pipeline import ExperimentRun
from harness.training import run_training
from harness.trajectory import Trajectory, merge_trajectories
from landscape.density import near_trajectory_density
from landscape.export import load_grid
from models import AnchorMode, EigenVariant, Method, SchemeKind
from numerics.mlp import init_params
from oracles import build_problem
from schemas import (
    BalancingScheme,
    ConvectionConfig,
    EigenConfig,
    ExperimentConfig,
    GridSpec,
    TrainerConfig,
    VisualizerConfig,
)

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"
SWEEP_SEED_COUNT = 3
SWEEP_ORACLES = ("L_test", "L_r", "L_ic", "L_bc")


def base_config(name: str, seed: int) -> ExperimentConfig:
    """Desk-scale defaults, shrunk to seconds when RECIPE_SCALE is "smoke" """
    if settings.RECIPE_SCALE == "smoke":
        return ExperimentConfig(
            name=name,
            problem=ConvectionConfig(n_residual=64, n_initial=16, n_boundary=16, test_resolution=8,
                                     hidden_sizes=(6,), seed=seed),
            trainer=TrainerConfig(epochs=12, lr=1e-2, stride=3, seed=seed),
            visualizer=VisualizerConfig(hidden_sizes=(12, 6), epochs=4, batch_size=4, lr=1e-3,
                                        c_rec=1.0, grid_samples=8, seed=seed),
            grids=[GridSpec(resolution=4)],
            density_resolution=3,
            seed=seed,
        )
    return ExperimentConfig(
        name=name,
        problem=ConvectionConfig(seed=seed),
        trainer=TrainerConfig(epochs=6000, lr=2e-3, stride=100, seed=seed),
        visualizer=VisualizerConfig(seed=seed),
        seed=seed,
    )


def sweep_seeds(seed: int) -> List[int]:
    """Seeds a trend is averaged over; one at smoke scale"""
    count = 1 if settings.RECIPE_SCALE == "smoke" else SWEEP_SEED_COUNT
    return [seed + i for i in range(count)]


def _with(config: ExperimentConfig, **sections) -> ExperimentConfig:
    """Copy with nested sections updated, e.g. _with(c, problem={"beta": 30})"""
    updates = {}
    for key, value in sections.items():
        current = getattr(config, key)
        updates[key] = current.model_copy(update=value) if isinstance(value, dict) else value
    return config.model_copy(update=updates)


def _write_summary(out: Path, summary: dict) -> Path:
    path = out / SUMMARY_FILE
    path.write_text(json.dumps(summary, sort_keys=True, indent=1), encoding="utf-8")
    return path


def _panel(out: Path, name: str, config: ExperimentConfig) -> ExperimentRun:
    return ExperimentRun(config.model_copy(update={"name": name}), out / name)


def _final_loss(run: ExperimentRun, name: str) -> float:
    return float(run.trajectory().losses[name][-1])


def fig1(out: Path, seed: int) -> dict:
    """One trajectory, all three methods, full and zoomed loss landscapes plus error surfaces"""
    config = base_config("fig1", seed)
    zoom = GridSpec(resolution=config.grids[0].resolution, window=(0.0, 1.0, 0.0, 1.0))
    config = config.model_copy(update={"grids": [config.grids[0], zoom], "oracles": ["L_total_physics", "L_test"]})
    run = ExperimentRun(config, out)
    run.generate()
    run.fit()
    run.landscape()
    reports = run.fidelity()
    run.error_surfaces(["L_total_physics"])
    run.render()
    return {"fidelity": [r.model_dump(mode="json") for r in reports]}


def final_losses(config: ExperimentConfig, seeds: Sequence[int], names: Sequence[str] = SWEEP_ORACLES) -> Dict[str, float]:
    """Final-model losses of `config`'s training run, averaged over seeds (problem sampling and init both vary)"""
    t = config.trainer
    rows = []
    for s in seeds:
        problem = build_problem(config.problem.model_copy(update={"seed": s}))
        net = init_params(problem.default_spec(), s, "init")
        # stride = epochs keeps only the initial and final checkpoints
        trajectory = run_training(problem, net, config.scheme, t.epochs, t.lr, t.epochs, s, oracle_names=list(names))
        rows.append([trajectory.losses[name][-1] for name in names])
    means = np.mean(np.array(rows), axis=0)
    return {name: float(value) for name, value in zip(names, means)}


def beta_sweep_configs(seed: int) -> Dict[str, ExperimentConfig]:
    base = base_config("fig4", seed).model_copy(update={"oracles": ["L_total", "L_test"], "baselines": []})
    return {f"beta{beta:g}": _with(base, problem={"beta": beta}) for beta in (1.0, 10.0, 30.0)}


def creg_sweep_configs(seed: int) -> Dict[str, ExperimentConfig]:
    base = base_config("fig8", seed).model_copy(update={"oracles": ["L_total", "L_test"], "baselines": []})
    return {f"c_r{c_r:g}": _with(base, problem={"beta": 10.0, "c_r": c_r}) for c_r in (1e-6, 1e-3, 1e-1)}


def _sweep(out: Path, seed: int, configs: Dict[str, ExperimentConfig]) -> dict:
    summary = {}
    for label, config in configs.items():
        run = _panel(out, label, config)
        run.generate()
        run.fit()
        run.landscape(["L_total"])
        run.render()
        means = final_losses(config, sweep_seeds(seed))
        summary[label] = {
            "L_test": _final_loss(run, "L_test"),
            "seed_mean": means,
            "data_fit": means["L_ic"] + means["L_bc"],
        }
        logger.info("%s: L_test %.4g (seed mean %.4g)", label, summary[label]["L_test"], means["L_test"])
    return summary


def fig4_beta_sweep(out: Path, seed: int) -> dict:
    """Identical budgets and seeds at beta = 1, 10, 30"""
    return _sweep(out, seed, beta_sweep_configs(seed))


def fig8_creg_sweep(out: Path, seed: int) -> dict:
    """
    Residual-loss coefficient c_r in {1e-6, 1e-3, 1e-1} at beta = 10.

    Raising c_r moves the optimum along the regularization path: the initial and
    boundary fit (data_fit) worsens while L_r falls. L_test falls with it, since
    a fit that ignores the PDE reproduces sin(x) at every t.
    """
    return _sweep(out, seed, creg_sweep_configs(seed))


def fig5_lmax(out: Path, seed: int) -> dict:
    """Grid-scaling constraint at l_max = 2 and 8 on the beta = 30 trajectory, with density landscapes"""
    base = _with(base_config("fig5", seed), problem={"beta": 30.0})
    base = base.model_copy(update={"baselines": []})
    source = ExperimentRun(base, out / "trajectory")
    trajectory = source.generate()
    summary = {}
    for l_max in (2.0, 8.0):
        run = _panel(out, f"lmax{l_max:g}", _with(base, visualizer={"c_grid": 1.0, "l_max": l_max}))
        run.adopt(trajectory)
        run.fit()
        run.landscape()
        density_path, = run.density(methods=[Method.VISUALIZER])
        run.render()
        summary[f"lmax{l_max:g}"] = {
            "trajectory": trajectory.digest(),
            "near_trajectory_density": near_trajectory_density(load_grid(density_path)),
        }
    return summary


def train_panels(base: ExperimentConfig, panels: Dict[str, ExperimentConfig]) -> Tuple[List[Trajectory], List[str]]:
    """Train every panel from the init of `base`"""
    problem = build_problem(base.problem)
    net = init_params(problem.default_spec(), base.seed, "init")
    trajectories, labels = [], []
    for label, config in panels.items():
        t = config.trainer
        trajectories.append(run_training(build_problem(config.problem), net, config.scheme, t.epochs, t.lr,
                                         t.stride, t.seed))
        labels.append(label)
    return trajectories, labels


def _merged(out: Path, base: ExperimentConfig, panels: Dict[str, ExperimentConfig]) -> dict:
    """Train every panel from one shared init, fit one manifold through all runs plus PCA"""
    trajectories, labels = train_panels(base, panels)
    merged = merge_trajectories(trajectories, labels)
    config = _with(base, visualizer={"anchor_mode": AnchorMode.CIRCLE, "c_anch": 1e2})
    config = config.model_copy(update={"baselines": [Method.PCA]})
    run = ExperimentRun(config, out)
    run.adopt(merged)
    run.fit()
    run.landscape()
    reports = run.fidelity()
    run.render()
    return {
        "final": {label: {name: float(values[s.stop - 1]) for name, values in merged.losses.items()}
                  for label, s in zip(labels, merged.segments)},
        "fidelity": [r.model_dump(mode="json") for r in reports],
    }


def mtl_balancing(out: Path, seed: int) -> dict:
    """EW, CW, DWA, RLW, LR-annealing and GradNorm from a shared init on the beta = 10 problem"""
    base = _with(base_config("mtl", seed), problem={"beta": 10.0})
    base = base.model_copy(update={"oracles": ["L_total_physics", "L_r", "L_ic", "L_bc"]})
    panels = {kind.value: base.model_copy(update={"scheme": BalancingScheme(kind=kind)}) for kind in SchemeKind}
    return _merged(out, base, panels)


def cophy_panels(seed: int) -> Tuple[ExperimentConfig, Dict[str, ExperimentConfig]]:
    smoke = settings.RECIPE_SCALE == "smoke"
    problem = EigenConfig(seed=seed, total_epochs=12 if smoke else 2000,
                          **({"n_labeled": 8, "n_unlabeled": 8, "n_test": 8, "hidden_sizes": (6,)} if smoke else {}))
    base = base_config("cophy", seed).model_copy(update={
        "problem": problem,
        "trainer": TrainerConfig(epochs=problem.total_epochs, lr=1e-3, stride=3 if smoke else 40, seed=seed),
        "oracles": ["Test-MSE", "E", "L_total_physics"],
    })
    panels = {
        variant.value: base.model_copy(update={"problem": problem.model_copy(update={"variant": variant})})
        for variant in (EigenVariant.COPHY, EigenVariant.BLACK_BOX)
    }
    return base, panels


def cophy_vs_blackbox(out: Path, seed: int) -> dict:
    """Physics-guided eigen-solver against a label-only black box from the same init"""
    base, panels = cophy_panels(seed)
    return _merged(out, base, panels)


def constraints(out: Path, seed: int) -> dict:
    """Vanilla, polar, center + grid and circle pinning over one beta = 30 trajectory"""
    base = _with(base_config("constraints", seed), problem={"beta": 30.0})
    base = base.model_copy(update={"baselines": []})
    trajectory = ExperimentRun(base, out / "trajectory").generate()
    variants = {
        "vanilla": {},
        "polar": {"anchor_mode": AnchorMode.POLAR, "c_anch": 1e2},
        "center_grid": {"anchor_mode": AnchorMode.CENTER, "c_anch": 1e2, "c_grid": 1.0},
        "circle": {"anchor_mode": AnchorMode.CIRCLE, "c_anch": 1e2},
    }
    summary = {}
    for name, update in variants.items():
        run = _panel(out, name, _with(base, visualizer=update))
        run.adopt(trajectory)
        run.fit()
        run.landscape()
        reports = run.fidelity()
        run.render()
        summary[name] = [r.model_dump(mode="json") for r in reports]
    return summary


RECIPES: Dict[str, Callable[[Path, int], dict]] = {
    "fig1": fig1,
    "fig4-beta-sweep": fig4_beta_sweep,
    "fig5-lmax": fig5_lmax,
    "fig8-creg-sweep": fig8_creg_sweep,
    "mtl-balancing": mtl_balancing,
    "cophy-vs-blackbox": cophy_vs_blackbox,
    "constraints": constraints,
}


def reproduce(name: str, out, seed: int) -> dict:
    if name not in RECIPES:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(RECIPES)}", stage="reproduce")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    logger.info("reproducing %s into %s (scale %s)", name, out, settings.RECIPE_SCALE)
    summary = RECIPES[name](out, seed)
    _write_summary(out, summary)
    return summary
