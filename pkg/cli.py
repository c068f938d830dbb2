"""
trajscape command-line entry point

    python cli.py generate --config experiment.json
    python cli.py fit --out runs/experiment --method pca
    python cli.py landscape --out runs/experiment --oracle L_test --window 0,1,0,1 --format svg
    python cli.py reproduce fig4-beta-sweep --out runs/fig4 --seed 3

Exit codes: 0 success, 1 runtime failure (the failing stage is named), 2 usage.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from config import configure_logging, settings
from errors import ConfigError, TrajscapeError
from experiments import RECIPES, ExperimentRun, load_config, reproduce
from models import Method
from schemas import ExperimentConfig, FidelityReport, GridSpec

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

FORMATS = ("svg", "json", "csv")


def parse_window(text: str) -> Tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected x1,x2,y1,y2, got {text!r}")
    try:
        x1, x2, y1, y2 = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window bounds must be numbers, got {text!r}") from None
    if not (x1 < x2 and y1 < y2):
        raise argparse.ArgumentTypeError(f"window needs x1 < x2 and y1 < y2, got {text!r}")
    if min(x1, y1) < -1.0 or max(x2, y2) > 1.0:
        raise argparse.ArgumentTypeError(f"window must lie inside [-1, 1]^2, got {text!r}")
    return x1, x2, y1, y2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Experiment config (JSON).")
    common.add_argument("--seed", type=int, help="Override every seed in the config.")
    common.add_argument("--out", type=Path, help="Output directory (defaults to the config's output_dir).")

    parser = argparse.ArgumentParser(prog="trajscape", description="Loss landscapes along training trajectories.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    sub.add_parser("generate", parents=[common], help="Train the target network and record its trajectory.")

    fit = sub.add_parser("fit", parents=[common], help="Fit the visualizer and/or baseline projections.")
    fit.add_argument("--method", action="append", choices=[m.value for m in Method], help="Repeatable.")

    landscape = sub.add_parser("landscape", parents=[common], help="Evaluate loss grids for named oracles.")
    landscape.add_argument("--oracle", action="append", help="Oracle name (repeatable).")
    landscape.add_argument("--method", action="append", choices=[m.value for m in Method], help="Repeatable.")
    landscape.add_argument("--resolution", type=int, help="Points per axis.")
    landscape.add_argument("--window", type=parse_window,
                           help="Latent window x1,x2,y1,y2 inside [-1, 1]^2 (use --window=-1,0,-1,0 for negatives).")
    landscape.add_argument("--format", action="append", choices=FORMATS, help="Repeatable; svg also renders.")

    density = sub.add_parser("density", parents=[common], help="CKA density landscape.")
    density.add_argument("--method", action="append", choices=[m.value for m in Method], help="Repeatable.")
    density.add_argument("--resolution", type=int, help="Points per axis.")

    fidelity = sub.add_parser("fidelity", parents=[common], help="Projection error report for all fitted methods.")
    fidelity.add_argument("--oracle", action="append", help="Oracle name (repeatable).")

    sub.add_parser("render", parents=[common], help="SVG from every exported grid.")

    rep = sub.add_parser("reproduce", parents=[common], help="Run a canned experiment.")
    rep.add_argument("experiment", choices=sorted(RECIPES))

    sub.add_parser("run", parents=[common], help="generate, fit, landscape, density, fidelity and render.")

    serve = sub.add_parser("serve", help="Serve run artifacts over HTTP (read-only).")
    serve.add_argument("--host", default=settings.HOST)
    serve.add_argument("--port", type=int, default=settings.PORT)
    return parser


def with_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    return config.model_copy(update={
        "seed": seed,
        "problem": config.problem.model_copy(update={"seed": seed}),
        "trainer": config.trainer.model_copy(update={"seed": seed}),
        "visualizer": config.visualizer.model_copy(update={"seed": seed}),
    })


def open_run(args: argparse.Namespace) -> ExperimentRun:
    """A run from --config, or the one stored under --out by an earlier stage"""
    if args.config is not None:
        config = load_config(args.config)
        if args.seed is not None:
            config = with_seed(config, args.seed)
        return ExperimentRun(config, args.out)
    run = ExperimentRun.resume(args.out or settings.OUTPUT_DIR)
    if args.seed is not None:
        run.config = with_seed(run.config, args.seed)
    return run


def grid_overrides(args: argparse.Namespace, run: ExperimentRun) -> Optional[List[GridSpec]]:
    if args.resolution is None and args.window is None:
        return None
    base = run.config.grids[0]
    return [GridSpec(
        resolution=args.resolution if args.resolution is not None else base.resolution,
        window=args.window if args.window is not None else base.window,
    )]


def fidelity_table(reports: Sequence[FidelityReport]) -> Table:
    table = Table(title="Projection fidelity")
    table.add_column("method")
    table.add_column("oracle")
    table.add_column("e_relative", justify="right")
    table.add_column("e_proj", justify="right")
    table.add_column("d_max", justify="right")
    for r in reports:
        table.add_row(r.method, r.oracle, f"{r.e_relative:.4g}", f"{r.e_proj:.4g}", f"{r.d_max:.4g}")
    return table


def _methods(args: argparse.Namespace) -> Optional[List[Method]]:
    return [Method(m) for m in args.method] if getattr(args, "method", None) else None


def dispatch(args: argparse.Namespace) -> None:
    if args.command == "serve":
        import uvicorn

        uvicorn.run("main:app", host=args.host, port=args.port, reload=settings.DEBUG)
        return
    if args.command == "reproduce":
        out = args.out or Path(settings.OUTPUT_DIR) / args.experiment
        seed = args.seed if args.seed is not None else settings.GLOBAL_SEED
        reproduce(args.experiment, out, seed)
        console.print(f"{args.experiment} written to {out}", markup=False)
        return

    run = open_run(args)
    if args.command == "generate":
        trajectory = run.generate()
        console.print(f"{trajectory.count} checkpoints written to {run.out}", markup=False)
    elif args.command == "fit":
        models = run.fit(_methods(args))
        console.print(f"fitted {', '.join(m.method.value for m in models)}", markup=False)
    elif args.command == "landscape":
        formats = args.format or ["json", "csv"]
        data_formats = [f for f in formats if f != "svg"] or ["json"]
        if "svg" in formats and "json" not in data_formats:
            data_formats.append("json")
        paths = run.landscape(args.oracle, grid_overrides(args, run), _methods(args), data_formats)
        if "svg" in formats:
            paths += run.render()
        console.print(f"{len(paths)} files written under {run.out}", markup=False)
    elif args.command == "density":
        paths = run.density(args.resolution, _methods(args))
        console.print(f"{len(paths)} density grids written under {run.out}", markup=False)
    elif args.command == "fidelity":
        console.print(fidelity_table(run.fidelity(args.oracle)))
    elif args.command == "render":
        paths = run.render()
        console.print(f"{len(paths)} SVG files written under {run.out}", markup=False)
    elif args.command == "run":
        console.print(fidelity_table(run.run_all()))


def cli_run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        try:
            dispatch(args)
        except ValidationError as exc:
            raise ConfigError(f"invalid configuration: {exc}", stage="config") from exc
    except TrajscapeError as exc:
        stage = exc.stage or args.command
        message = TrajscapeError.__str__(exc) if exc.stage else f"[{stage}] {exc}"
        err_console.print(f"error: {message}", markup=False, highlight=False, soft_wrap=True)
        logger.debug("stage %s failed", stage, exc_info=True)
        return 1
    return 0


def main() -> None:
    configure_logging()
    sys.exit(cli_run())


if __name__ == "__main__":
    main()
