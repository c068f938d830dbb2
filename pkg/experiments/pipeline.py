"""
Experiment stages: each reads its inputs from, and writes its artifacts to, one
output directory, and records them in that directory's manifest.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from baselines.kpca import fit_kpca
from baselines.pca import fit_pca
from config import settings
from errors import ConfigError, UsageError
from harness.storage import load_trajectory, save_trajectory
from harness.training import run_training
from harness.trajectory import Trajectory, normalize
from landscape.density import density_grid
from landscape.export import load_grid, write_grid
from landscape.fidelity import error_grid, fidelity
from landscape.grid import evaluate_grid
from landscape.projectors import Projector, load_projector, save_projector
from models import ErrorKind, LevelSpacing, Method
from numerics.mlp import init_params
from oracles import build_problem
from oracles.base import TargetProblem
from render.svg import render_svg
from schemas import ExperimentConfig, FidelityReport, GridSpec, Manifest, ManifestEntry
from visualizer.training import train_visualizer

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.json"
MANIFEST_FILE = "manifest.json"
TRAJECTORY_FILE = "trajectory.nvtj"
FIDELITY_FILE = "fidelity.json"


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dump_config(config: ExperimentConfig) -> str:
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, indent=1)


def load_config(path) -> ExperimentConfig:
    """Parse a JSON config; a relative output_dir resolves against the config's directory"""
    path = Path(path)
    try:
        config = ExperimentConfig.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found", stage="config") from None
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}: {exc}", stage="config") from None
    output = Path(config.output_dir)
    if not output.is_absolute():
        config = config.model_copy(update={"output_dir": str(path.parent / output)})
    return config


class ExperimentRun:
    """One experiment's artifacts under `out_dir`"""

    def __init__(self, config: ExperimentConfig, out_dir=None):
        self.config = config
        self.out = Path(out_dir or config.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)

    @classmethod
    def resume(cls, out_dir) -> "ExperimentRun":
        """Reopen a run from the config stored by an earlier stage"""
        path = Path(out_dir) / CONFIG_FILE
        if not path.exists():
            raise UsageError(f"{out_dir} has no {CONFIG_FILE}; pass --config or run generate first", stage="config")
        config = ExperimentConfig.model_validate_json(path.read_text(encoding="utf-8"))
        return cls(config, out_dir)

    # Manifest

    @property
    def seeds(self) -> Dict[str, int]:
        c = self.config
        return {"global": c.seed, "problem": c.problem.seed, "trainer": c.trainer.seed, "visualizer": c.visualizer.seed}

    def manifest(self) -> Manifest:
        path = self.out / MANIFEST_FILE
        if path.exists():
            return Manifest.model_validate_json(path.read_text(encoding="utf-8"))
        return Manifest(name=self.config.name, config_sha256="", seeds=self.seeds)

    def record(self, paths: Sequence[Path], stage: str) -> None:
        manifest = self.manifest()
        entries = {e.path: e for e in manifest.entries}
        for path in paths:
            rel = Path(path).relative_to(self.out).as_posix()
            entries[rel] = ManifestEntry(path=rel, sha256=sha256_file(path), stage=stage)
        config_text = dump_config(self.config)
        manifest = Manifest(
            name=self.config.name,
            config_sha256=hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
            seeds=self.seeds,
            entries=[entries[key] for key in sorted(entries)],
        )
        (self.out / MANIFEST_FILE).write_text(
            json.dumps(manifest.model_dump(mode="json"), sort_keys=True, indent=1), encoding="utf-8"
        )

    def _write_config(self) -> Path:
        path = self.out / CONFIG_FILE
        path.write_text(dump_config(self.config), encoding="utf-8")
        return path

    # Inputs

    def problem(self) -> TargetProblem:
        return build_problem(self.config.problem)

    def trajectory(self) -> Trajectory:
        path = self.out / TRAJECTORY_FILE
        if not path.exists():
            raise UsageError(f"no trajectory at {path}; run generate first", stage="generate")
        return load_trajectory(path)

    def model_path(self, method: Method) -> Path:
        return self.out / "models" / f"{Method(method).value}.nvtj"

    def fitted(self, methods: Optional[Sequence[Method]] = None) -> List[Projector]:
        methods = methods or [Method.VISUALIZER, *self.config.baselines]
        models = [load_projector(self.model_path(m), m) for m in methods if self.model_path(m).exists()]
        if not models:
            raise UsageError(f"no fitted models under {self.out / 'models'}; run fit first", stage="fit")
        return models

    def oracle_problem(self, trajectory: Trajectory) -> TargetProblem:
        return build_problem(trajectory.problem) if trajectory.problem else self.problem()

    # Stages

    def generate(self) -> Trajectory:
        problem = self.problem()
        c = self.config
        net = init_params(problem.default_spec(), c.seed, "init")
        trajectory = run_training(problem, net, c.scheme, c.trainer.epochs, c.trainer.lr, c.trainer.stride, c.trainer.seed)
        return self.adopt(trajectory)

    def adopt(self, trajectory: Trajectory) -> Trajectory:
        """Store a trajectory produced elsewhere (e.g. merged runs) as this run's input"""
        paths = [self._write_config(), save_trajectory(self.out / TRAJECTORY_FILE, trajectory)]
        self.record(paths, "generate")
        return trajectory

    def fit(self, methods: Optional[Sequence[Method]] = None) -> List[Projector]:
        methods = [Method(m) for m in (methods or [Method.VISUALIZER, *self.config.baselines])]
        trajectory, _ = normalize(self.trajectory())
        models, paths = [], []
        for method in methods:
            if method is Method.VISUALIZER:
                model, log = train_visualizer(trajectory, self.config.visualizer)
                log_path = self.out / "models" / "visualizer_log.csv"
                log_path.parent.mkdir(parents=True, exist_ok=True)
                log.to_frame().to_csv(log_path, index=False, lineterminator="\n")
                paths.append(log_path)
            elif method is Method.PCA:
                model = fit_pca(trajectory)
            else:
                model = fit_kpca(trajectory, self.config.kpca_gamma)
            paths.append(save_projector(self.model_path(method), model))
            models.append(model)
        self.record(paths, "fit")
        return models

    def landscape(self, oracles: Optional[Sequence[str]] = None, grids: Optional[Sequence[GridSpec]] = None,
                  methods: Optional[Sequence[Method]] = None, formats: Sequence[str] = ("json", "csv")) -> List[Path]:
        trajectory = self.trajectory()
        registry = self.oracle_problem(trajectory).register_oracles()
        names = list(oracles or self.config.oracles)
        grids = list(grids or self.config.grids)
        paths = []
        for model in self.fitted(methods):
            for name in names:
                for index, spec in enumerate(grids):
                    grid = evaluate_grid(model, spec, registry[name], trajectory)
                    stem = f"{model.method.value}__{name}__{index}"
                    paths += [write_grid(self.out / "grids" / f"{stem}.{fmt}", grid, fmt) for fmt in formats]
        self.record(paths, "landscape")
        return paths

    def density(self, resolution: Optional[int] = None, methods: Optional[Sequence[Method]] = None) -> List[Path]:
        trajectory = self.trajectory()
        problem = self.oracle_problem(trajectory)
        probe = problem.probe_inputs(settings.CKA_PROBE_COUNT, self.config.seed)
        spec = GridSpec(resolution=resolution or self.config.density_resolution)
        paths = []
        for model in self.fitted(methods):
            grid = density_grid(model, spec, probe, trajectory)
            paths.append(write_grid(self.out / "grids" / f"{model.method.value}__density.json", grid))
        self.record(paths, "density")
        return paths

    def fidelity(self, oracles: Optional[Sequence[str]] = None) -> List[FidelityReport]:
        models = self.fitted()
        trajectory = self.trajectory()
        registry = self.oracle_problem(trajectory).register_oracles()
        reports = [
            fidelity(model, trajectory, registry[name])
            for model in models
            for name in (oracles or self.config.oracles)
        ]
        path = self.out / FIDELITY_FILE
        path.write_text(json.dumps([r.model_dump(mode="json") for r in reports], sort_keys=True, indent=1),
                        encoding="utf-8")
        self.record([path], "fidelity")
        return reports

    def error_surfaces(self, oracles: Optional[Sequence[str]] = None) -> List[Path]:
        trajectory = self.trajectory()
        registry = self.oracle_problem(trajectory).register_oracles()
        spec = self.config.grids[0]
        paths = []
        for model in self.fitted():
            for name in oracles or self.config.oracles:
                for kind in ErrorKind:
                    grid = error_grid(model, trajectory, registry[name], kind, spec)
                    stem = f"{model.method.value}__{name}__{kind.value}"
                    paths.append(write_grid(self.out / "grids" / f"{stem}.json", grid))
        self.record(paths, "fidelity")
        return paths

    def render(self) -> List[Path]:
        sources = sorted((self.out / "grids").glob("*.json"))
        if not sources:
            raise UsageError(f"no exported grids under {self.out / 'grids'}; run landscape first", stage="landscape")
        paths = []
        for source in sources:
            grid = load_grid(source)
            style = self.config.render
            if grid.field_name == "cka_density":
                style = style.model_copy(update={"spacing": LevelSpacing.LINEAR})
            target = self.out / "svg" / f"{source.stem}.svg"
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(render_svg(grid, style), encoding="utf-8")
            paths.append(target)
        self.record(paths, "render")
        return paths

    def run_all(self) -> List[FidelityReport]:
        self.generate()
        self.fit()
        self.landscape()
        self.density()
        reports = self.fidelity()
        self.render()
        return reports
