import csv
import json

import pytest

from forward_arc.coordinator import TRAJECTORY_COLUMNS, Outcome
from forward_arc.harness import BatchReport, RunMetadata, TrialRecord, TrialResult, aggregate_cell
from forward_arc.planning.errors import ConfigError, ReportError
from forward_arc.planning.planner import DecisionKind, RoundRecord
from forward_arc.report import (
    CELL_COLUMNS,
    CELLS_CSV,
    METADATA_JSON,
    REPORT_JSON,
    ROUND_TIMING_FIELDS,
    TRIAL_COLUMNS,
    TRIALS_CSV,
    ReportFormat,
    load_report,
    load_trial_rows,
    write_report,
    write_run,
)


@pytest.fixture
def report() -> BatchReport:
    result = TrialResult(
        outcome=Outcome.SUCCESS,
        flight_time=25.0,
        path_length=71.0,
        max_speed=3.0,
        avg_speed=2.84,
        control_effort=12.5,
        decision_counts={"commit": 290, "execute_stop": 10},
        plan_rounds=300,
        plan_time_mean_ms=1.5,
        plan_time_max_ms=4.0,
        start=(0.0, -15.0, 1.5),
        goal=(70.0, -15.0, 1.5),
        final_position=(69.5, -15.0, 1.5),
        final_speed=2.9,
        final_clearance=1.2,
        final_distance_to_goal=0.5,
        safety_deviation=0.1,
    )
    records = [
        TrialRecord(cell=0, trial=0, density=0.05, v_x=3.0, world_seed=42, endpoint=0, result=result),
        TrialRecord(
            cell=0, trial=1, density=0.05, v_x=3.0, world_seed=42, endpoint=1, failure="goal outside"
        ),
    ]
    metadata = RunMetadata(config_hash="ab" * 32, seed=0, trials_per_cell=2, matrix=[(0.05, 3.0)])
    return BatchReport(metadata=metadata, cells=[aggregate_cell(0, 0.05, 3.0, records)], trials=records)


def test_csv_report_layout(tmp_path, report):
    written = write_report(report, tmp_path, ReportFormat.CSV)
    assert [p.name for p in written] == [TRIALS_CSV, CELLS_CSV, METADATA_JSON]

    with (tmp_path / TRIALS_CSV).open(newline="") as fh:
        header = next(csv.reader(fh))
    assert tuple(header) == TRIAL_COLUMNS

    rows = load_trial_rows(tmp_path / TRIALS_CSV)
    assert len(rows) == 2
    assert rows[0]["outcome"] == "success"
    assert float(rows[0]["flight_time"]) == 25.0
    assert rows[0]["failure"] == ""
    assert rows[1]["outcome"] == ""
    assert rows[1]["failure"] == "goal outside"

    with (tmp_path / CELLS_CSV).open(newline="") as fh:
        cells = list(csv.DictReader(fh))
    assert tuple(cells[0]) == CELL_COLUMNS
    assert float(cells[0]["success_rate"]) == 1.0
    assert cells[0]["failures"] == "1"
    assert float(cells[0]["path_length_median"]) == 71.0

    assert json.loads((tmp_path / METADATA_JSON).read_text())["trials_per_cell"] == 2


def test_json_report_loads_back(tmp_path, report):
    [path] = write_report(report, tmp_path)
    assert path.name == REPORT_JSON
    assert load_report(tmp_path) == report
    assert load_report(path).deterministic_dump() == report.deterministic_dump()


def test_load_report_errors(tmp_path):
    with pytest.raises(ReportError):
        load_report(tmp_path / "missing.json")
    bogus = tmp_path / "bogus.json"
    bogus.write_text('{"cells": []}')
    with pytest.raises(ConfigError):
        load_report(bogus)


def test_write_report_names_the_failing_path(tmp_path, report):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ReportError, match="file"):
        write_report(report, blocker)


def test_write_run(tmp_path, report):
    result = report.trials[0].result
    trajectory = [(0.0, 0.0, -15.0, 1.5, 0.0, 0.0, 0.0, 0.0, 0.0, "commit")]
    written = write_run(tmp_path / "run", result, trajectory, [], {"seed": 3})
    assert [p.name for p in written] == ["trajectory.csv", "result.json", "rounds.ndjson"]

    with written[0].open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TRAJECTORY_COLUMNS
    assert rows[1][-1] == "commit"

    payload = json.loads(written[1].read_text())
    assert payload["metadata"] == {"seed": 3}
    assert payload["result"]["outcome"] == "success"
    assert written[2].read_text() == ""


def test_single_trial_csv_has_one_row(tmp_path, report):
    single = report.model_copy(update={"trials": report.trials[:1]})
    write_report(single, tmp_path, ReportFormat.CSV)
    lines = (tmp_path / TRIALS_CSV).read_text().splitlines()
    assert len(lines) == 2
    assert lines[0] == ",".join(TRIAL_COLUMNS)


def test_run_rounds_leave_out_wall_clock_time(tmp_path, report):
    result = report.trials[0].result
    rounds = [
        RoundRecord(t=0.0, kind=DecisionKind.COMMIT, selected_index=16, plan_time_ms=plan_time)
        for plan_time in (1.25, 3.5)
    ]
    first = write_run(tmp_path / "a", result, [], rounds[:1], {})[2].read_text()
    second = write_run(tmp_path / "b", result, [], rounds[1:], {})[2].read_text()
    assert first == second
    record = json.loads(first)
    assert record["kind"] == "commit"
    assert record["selected_index"] == 16
    assert not ROUND_TIMING_FIELDS & record.keys()
