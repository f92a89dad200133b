"""Report writers and loaders for batches and single runs."""

from collections.abc import Iterable, Sequence
import csv
from enum import Enum
import json
import logging
from pathlib import Path

from pydantic import ValidationError

from .coordinator import TRAJECTORY_COLUMNS
from .harness import METRIC_NAMES, BatchReport, TrialResult
from .planning.errors import ConfigError, ReportError
from .planning.planner import RoundRecord

_LOGGER = logging.getLogger(__name__)

REPORT_JSON = "report.json"
TRIALS_CSV = "trials.csv"
CELLS_CSV = "cells.csv"
METADATA_JSON = "metadata.json"
ROUND_TIMING_FIELDS = {"plan_time_ms"}

TRIAL_COLUMNS = (
    "cell",
    "trial",
    "density",
    "v_x",
    "world_seed",
    "endpoint",
    "outcome",
    "flight_time",
    "path_length",
    "max_speed",
    "avg_speed",
    "control_effort",
    "final_speed",
    "final_clearance",
    "final_distance_to_goal",
    "plan_rounds",
    "plan_time_mean_ms",
    "plan_time_max_ms",
    "safety_deviation",
    "failure",
)

CELL_COLUMNS = (
    "cell",
    "density",
    "v_x",
    "trials",
    "successes",
    "collisions",
    "timeouts",
    "failures",
    "success_rate",
    "collision_rate",
    "timeout_rate",
    "plan_time_mean_ms",
    *(f"{name}_{stat}" for name in METRIC_NAMES for stat in ("min", "median", "mean", "max")),
)


class ReportFormat(str, Enum):
    """Batch report output format."""

    CSV = "csv"
    JSON = "json"


def _write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: "" if value is None else value for key, value in row.items()})


def trial_rows(report: BatchReport) -> list[dict]:
    """Flatten trial records into TRIAL_COLUMNS rows."""
    rows = []
    for record in report.trials:
        row = record.model_dump(exclude={"result"})
        if record.result is not None:
            row |= record.result.model_dump(
                mode="json", exclude={"decision_counts", "start", "goal", "final_position"}
            )
        rows.append(row)
    return rows


def cell_rows(report: BatchReport) -> list[dict]:
    """Flatten cell aggregates into CELL_COLUMNS rows."""
    rows = []
    for cell in report.cells:
        row = cell.model_dump(exclude={"metrics"})
        for name, summary in cell.metrics.items():
            for stat in ("min", "median", "mean", "max"):
                row[f"{name}_{stat}"] = getattr(summary, stat)
        rows.append(row)
    return rows


def write_report(report: BatchReport, out_dir: Path, fmt: ReportFormat = ReportFormat.JSON) -> list[Path]:
    """
    Write a batch report; returns the files written.

    Raises:
        ReportError: on any I/O failure, naming the file.
    """
    out_dir = Path(out_dir)
    written: list[Path] = []
    path = out_dir
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if fmt is ReportFormat.JSON:
            path = out_dir / REPORT_JSON
            path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
            written.append(path)
        else:
            path = out_dir / TRIALS_CSV
            _write_csv(path, TRIAL_COLUMNS, trial_rows(report))
            written.append(path)
            path = out_dir / CELLS_CSV
            _write_csv(path, CELL_COLUMNS, cell_rows(report))
            written.append(path)
            path = out_dir / METADATA_JSON
            path.write_text(report.metadata.model_dump_json(indent=2), encoding="utf-8")
            written.append(path)
    except OSError as e:
        msg = f"Failed to write report file {path}: {e}"
        raise ReportError(msg) from e
    _LOGGER.info("Wrote %s", ", ".join(str(p) for p in written))
    return written


def load_report(path: Path) -> BatchReport:
    """
    Load a JSON batch report from a file or a directory holding report.json.

    Raises:
        ReportError: if the file cannot be read.
        ConfigError: if it is not a valid report.
    """
    path = Path(path)
    if path.is_dir():
        path /= REPORT_JSON
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        msg = f"Failed to read report {path}: {e}"
        raise ReportError(msg) from e
    try:
        return BatchReport.model_validate_json(text)
    except ValidationError as e:
        msg = f"Invalid report {path}: {e}"
        raise ConfigError(msg) from e


def load_trial_rows(path: Path) -> list[dict[str, str]]:
    """Read trials.csv back as string rows."""
    try:
        with Path(path).open(newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as e:
        msg = f"Failed to read {path}: {e}"
        raise ReportError(msg) from e


def write_run(
    out_dir: Path,
    result: TrialResult,
    trajectory: Sequence[tuple],
    rounds: Sequence[RoundRecord],
    metadata: dict,
) -> list[Path]:
    """
    Write a single run: trajectory.csv, result.json and rounds.ndjson.

    Round records leave out their wall-clock planning time, so reruns give
    identical rounds.ndjson; result.json keeps the mean and max.
    """
    out_dir = Path(out_dir)
    path = out_dir
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "trajectory.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRAJECTORY_COLUMNS)
            writer.writerows(trajectory)
        written.append(path)
        path = out_dir / "result.json"
        payload = {"metadata": metadata, "result": json.loads(result.model_dump_json())}
        path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        written.append(path)
        path = out_dir / "rounds.ndjson"
        with path.open("w", encoding="utf-8") as fh:
            for record in rounds:
                fh.write(record.model_dump_json(exclude=ROUND_TIMING_FIELDS))
                fh.write("\n")
        written.append(path)
    except OSError as e:
        msg = f"Failed to write run file {path}: {e}"
        raise ReportError(msg) from e
    return written
