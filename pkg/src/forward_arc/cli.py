"""Command-line entry point: run, batch, worldgen and report."""

import argparse
from collections.abc import Sequence
import logging
import os
from pathlib import Path
import sys

import colorlog
from rich.console import Console
from rich.table import Table

from .config import ForestConfig, LoggingConfig, TrialConfig, load_config
from .const import DEFAULT_OUTPUT_DIR, ENV_OUTPUT_DIR, VERSION
from .harness import BatchReport, default_matrix, run_batch, run_trial_detailed
from .planning.errors import ConfigError
from .report import ReportFormat, load_report, write_report, write_run
from .sim.world import gen_forest, save_world

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

LOG_FORMAT = "%(log_color)s%(asctime)s %(levelname)-8s%(reset)s %(name)s: %(message)s"


def setup_logging(logging_config: LoggingConfig | None = None, verbose: bool = False) -> None:
    """Install one colored console handler on the root logger."""
    logging_config = logging_config or LoggingConfig()
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT, datefmt="%H:%M:%S"))
    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging_config.default.upper())
    for name, level in logging_config.logs.items():
        logging.getLogger(name).setLevel(level.upper())


def output_dir(value: str | None) -> Path:
    """Resolve --out, then the environment variable, then ./runs."""
    if value:
        return Path(value)
    return Path(os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR)


def _float_list(value: str) -> list[float]:
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError as e:
        msg = f"expected a comma-separated list of numbers, got {value!r}"
        raise argparse.ArgumentTypeError(msg) from e


def _point(value: str) -> tuple[float, float, float]:
    coords = _float_list(value)
    if len(coords) != 3:  # noqa: PLR2004
        msg = f"expected x,y,z, got {value!r}"
        raise argparse.ArgumentTypeError(msg)
    return (coords[0], coords[1], coords[2])


def _load(args: argparse.Namespace) -> TrialConfig:
    cfg = TrialConfig() if args.config is None else load_config(args.config)
    return cfg if args.seed is None else cfg.with_seed(args.seed)


def cmd_run(args: argparse.Namespace) -> int:
    """Run a single trial and write its trajectory, result and planning rounds."""
    cfg = _load(args)
    setup_logging(cfg.logging_config, args.verbose)
    result, run = run_trial_detailed(cfg, record_trajectory=True)
    out = output_dir(args.out)
    metadata = {
        "version": VERSION,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "world_seed": cfg.world.seed,
    }
    write_run(out, result, run.trajectory, run.rounds, metadata)
    Console().print(
        f"[bold]{result.outcome.value}[/bold] after {result.flight_time:.2f} s, "
        f"path {result.path_length:.2f} m, written to {out}"
    )
    return EXIT_OK


def summary_table(report: BatchReport) -> Table:
    """Density x speed matrix of outcome rates and mean planning time."""
    table = Table(title="Batch summary", show_header=True, header_style="bold cyan")
    table.add_column("density (1/m²)", justify="right")
    table.add_column("v_x (m/s)", justify="right")
    table.add_column("trials", justify="right")
    table.add_column("success", justify="right", style="green")
    table.add_column("collision", justify="right", style="red")
    table.add_column("timeout", justify="right", style="yellow")
    table.add_column("failed", justify="right")
    table.add_column("plan (ms)", justify="right")
    for cell in report.cells:
        plan = "-" if cell.plan_time_mean_ms is None else f"{cell.plan_time_mean_ms:.2f}"
        table.add_row(
            f"{cell.density:.3f}",
            f"{cell.v_x:.1f}",
            str(cell.trials),
            f"{cell.success_rate:.0%}",
            f"{cell.collision_rate:.0%}",
            f"{cell.timeout_rate:.0%}",
            str(cell.failures),
            plan,
        )
    return table


def cmd_batch(args: argparse.Namespace) -> int:
    """Run the density x speed matrix and write the report."""
    cfg = _load(args)
    setup_logging(cfg.logging_config, args.verbose)
    if args.densities is None and args.speeds is None:
        matrix = default_matrix()
    else:
        forest = cfg.world.forest or ForestConfig()
        densities = args.densities or [forest.density]
        speeds = args.speeds or [cfg.planner.v_x]
        matrix = [(density, speed) for density in densities for speed in speeds]
    report = run_batch(matrix, args.trials, cfg, parallelism=args.jobs)
    out = output_dir(args.out)
    write_report(report, out, ReportFormat.JSON)
    if args.format is ReportFormat.CSV:
        write_report(report, out, ReportFormat.CSV)
    Console().print(summary_table(report))
    return EXIT_OK


def cmd_worldgen(args: argparse.Namespace) -> int:
    """Generate a forest world file."""
    setup_logging(verbose=args.verbose)
    half = args.height / 2
    world = gen_forest(
        args.density,
        region=(0.0, args.width, -half, half),
        seed=args.seed,
        keep_clear=(args.start, args.goal),
    )
    out = Path(args.out) if args.out else output_dir(None) / "world.json"
    save_world(world, out)
    Console().print(
        f"{len(world.cylinders)} cylinders (density {world.realized_density:.4f}/m²) written to {out}"
    )
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    """Re-emit a saved batch report in another format and print its summary."""
    setup_logging(verbose=args.verbose)
    source = Path(args.input)
    report = load_report(source)
    out = Path(args.out) if args.out else (source if source.is_dir() else source.parent)
    write_report(report, out, args.format)
    Console().print(summary_table(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = argparse.ArgumentParser(
        prog="forward-arc", description="Forward-arc primitive planner benchmarks."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run a single trial")
    run.add_argument("--config", type=Path, help="TOML or JSON trial config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help=f"output directory (default ${ENV_OUTPUT_DIR} or ./{DEFAULT_OUTPUT_DIR})")
    run.set_defaults(func=cmd_run)

    batch = sub.add_parser("batch", parents=[common], help="run a density x speed matrix")
    batch.add_argument("--config", type=Path, help="TOML or JSON base trial config")
    batch.add_argument("--seed", type=int)
    batch.add_argument("--densities", type=_float_list, help="comma-separated obstacles/m²")
    batch.add_argument("--speeds", type=_float_list, help="comma-separated forward speeds (m/s)")
    batch.add_argument("--trials", type=int, default=50, help="trials per cell")
    batch.add_argument("--jobs", type=int, default=1, help="worker processes")
    batch.add_argument("--format", type=ReportFormat, choices=list(ReportFormat), default=ReportFormat.JSON)
    batch.add_argument("--out")
    batch.set_defaults(func=cmd_batch)

    worldgen = sub.add_parser("worldgen", parents=[common], help="generate a forest world file")
    worldgen.add_argument("--density", type=float, required=True, help="obstacles/m²")
    worldgen.add_argument("--width", type=float, default=70.0, help="x extent (m)")
    worldgen.add_argument("--height", type=float, default=40.0, help="y extent (m)")
    worldgen.add_argument("--seed", type=int, default=0)
    worldgen.add_argument(
        "--start", type=_point, default=TrialConfig.model_fields["start"].default, help="x,y,z kept clear"
    )
    worldgen.add_argument(
        "--goal", type=_point, default=TrialConfig.model_fields["goal"].default, help="x,y,z kept clear"
    )
    worldgen.add_argument("--out")
    worldgen.set_defaults(func=cmd_worldgen)

    report = sub.add_parser("report", parents=[common], help="convert a saved batch report")
    report.add_argument("--in", dest="input", required=True, help="report.json or its directory")
    report.add_argument("--format", type=ReportFormat, choices=list(ReportFormat), default=ReportFormat.CSV)
    report.add_argument("--out")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        _LOGGER.error("%s", e)  # noqa: TRY400
        return EXIT_CONFIG
    except OSError as e:
        _LOGGER.error("%s", e)  # noqa: TRY400
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
