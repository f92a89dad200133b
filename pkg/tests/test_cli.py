import json
import logging
import math

import pytest

from forward_arc.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main, output_dir, setup_logging
from forward_arc.config import LoggingConfig
from forward_arc.const import DEFAULT_SPAWN_RADIUS, ENV_OUTPUT_DIR
from forward_arc.report import load_report, load_trial_rows
from forward_arc.sim.world import Box, World, load_world, save_world


@pytest.fixture(autouse=True)
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
    for name in ("forward_arc.coordinator", "forward_arc.harness"):
        logging.getLogger(name).setLevel(logging.NOTSET)


@pytest.fixture
def config_file(tmp_path, camera):
    world = tmp_path / "world.json"
    save_world(World(bounds=Box(lower=(-20.0, -20.0, 0.0), upper=(20.0, 20.0, 10.0)), ground_z=0.0), world)
    path = tmp_path / "trial.json"
    config = {
        "world": {"file": str(world)},
        "start": [0.0, 0.0, 1.5],
        "goal": [10.0, 0.0, 1.5],
        "time_limit": 0.05,
        "camera": camera.model_dump(mode="json"),
        "logging": {"default": "warning", "logs": {"forward_arc.coordinator": "debug"}},
    }
    path.write_text(json.dumps(config))
    return path


def test_run_writes_the_run_files(tmp_path, config_file):
    out = tmp_path / "run"
    assert main(["run", "--config", str(config_file), "--seed", "4", "--out", str(out)]) == EXIT_OK
    assert {p.name for p in out.iterdir()} == {"trajectory.csv", "result.json", "rounds.ndjson"}
    payload = json.loads((out / "result.json").read_text())
    assert payload["metadata"]["seed"] == 4
    assert payload["result"]["outcome"] == "timeout"
    assert len((out / "rounds.ndjson").read_text().splitlines()) == 1
    assert logging.getLogger("forward_arc.coordinator").level == logging.DEBUG

    again = tmp_path / "again"
    assert main(["run", "--config", str(config_file), "--seed", "4", "--out", str(again)]) == EXIT_OK
    assert (again / "rounds.ndjson").read_bytes() == (out / "rounds.ndjson").read_bytes()


def test_seed_reseeds_the_forest(tmp_path, camera):
    path = tmp_path / "forest.json"
    config = {
        "world": {"seed": 0, "forest": {"density": 0.02}},
        "start": [0.0, 0.0, 1.5],
        "goal": [10.0, 0.0, 1.5],
        "time_limit": 0.05,
        "camera": camera.model_dump(mode="json"),
    }
    path.write_text(json.dumps(config))
    for seed in (1, 2):
        out = tmp_path / f"seed{seed}"
        assert main(["run", "--config", str(path), "--seed", str(seed), "--out", str(out)]) == EXIT_OK
        metadata = json.loads((out / "result.json").read_text())["metadata"]
        assert (metadata["seed"], metadata["world_seed"]) == (seed, seed)
    first = json.loads((tmp_path / "seed1" / "result.json").read_text())["metadata"]
    second = json.loads((tmp_path / "seed2" / "result.json").read_text())["metadata"]
    assert first["config_hash"] != second["config_hash"]


def test_output_dir_falls_back_to_environment(tmp_path, monkeypatch, config_file):
    monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path / "env"))
    assert output_dir(None) == tmp_path / "env"
    assert output_dir("explicit").name == "explicit"
    assert main(["run", "--config", str(config_file)]) == EXIT_OK
    assert (tmp_path / "env" / "result.json").is_file()
    monkeypatch.delenv(ENV_OUTPUT_DIR)
    assert output_dir(None).name == "runs"


def test_invalid_config_exits_with_config_code(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("start = [0.0, 0.0, 1.5]\ngoal = [0.0, 0.0, 1.5]\n")
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG
    path.write_text("start = [")
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG


def test_missing_config_exits_with_io_code(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == EXIT_IO


def test_worldgen(tmp_path):
    out = tmp_path / "forest.json"
    args = ["worldgen", "--density", "0.05", "--width", "20", "--height", "10", "--seed", "3"]
    args += ["--out", str(out)]
    assert main(args) == EXIT_OK
    world = load_world(out)
    assert world.requested_density == 0.05
    assert world.cylinders
    for cylinder in world.cylinders:
        x, y = cylinder.center_xy
        assert 0.0 <= x <= 20.0
        assert -5.0 <= y <= 5.0


def surface_distance(world: World, point: tuple[float, float]) -> float:
    return min(math.dist(c.center_xy, point) - c.radius for c in world.cylinders)


def test_worldgen_keeps_the_endpoints_clear(tmp_path):
    out = tmp_path / "forest.json"
    assert main(["worldgen", "--density", "0.1", "--seed", "1", "--out", str(out)]) == EXIT_OK
    world = load_world(out)
    for point in ((0.0, 0.0), (70.0, 0.0)):
        assert surface_distance(world, point) >= DEFAULT_SPAWN_RADIUS - 1e-9

    custom = tmp_path / "custom.json"
    args = ["worldgen", "--density", "0.1", "--start", "10,5,1.5", "--goal", "60,-5,1.5"]
    assert main([*args, "--out", str(custom)]) == EXIT_OK
    world = load_world(custom)
    for point in ((10.0, 5.0), (60.0, -5.0)):
        assert surface_distance(world, point) >= DEFAULT_SPAWN_RADIUS - 1e-9


def test_batch_then_report(tmp_path, config_file):
    out = tmp_path / "batch"
    args = ["batch", "--config", str(config_file), "--densities", "0.05", "--speeds", "3.0", "--trials", "2"]
    assert main([*args, "--out", str(out)]) == EXIT_OK
    report = load_report(out)
    assert report.metadata.matrix == [(0.05, 3.0)]
    assert len(report.trials) == 2
    assert not (out / "trials.csv").exists()

    assert main(["report", "--in", str(out / "report.json")]) == EXIT_OK
    rows = load_trial_rows(out / "trials.csv")
    assert [row["trial"] for row in rows] == ["0", "1"]
    assert (out / "cells.csv").is_file()


def test_report_of_missing_file(tmp_path):
    assert main(["report", "--in", str(tmp_path / "nope.json")]) == EXIT_IO


def test_version(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
    assert "forward-arc" in capsys.readouterr().out


def test_setup_logging_replaces_handlers():
    setup_logging(LoggingConfig(default="error", logs={"forward_arc.harness": "debug"}))
    root = logging.getLogger()
    assert len(root.handlers) == 1
    assert root.level == logging.ERROR
    assert logging.getLogger("forward_arc.harness").level == logging.DEBUG
    setup_logging(verbose=True)
    assert len(root.handlers) == 1
    assert root.level == logging.DEBUG
