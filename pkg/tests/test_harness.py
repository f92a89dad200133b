import itertools
import os

import numpy as np
import pytest

from forward_arc.config import ForestConfig, TrialConfig, WorldSource
from forward_arc.const import DEFAULT_DENSITIES, DEFAULT_SPEEDS
from forward_arc.coordinator import Outcome, VerifiedSegment, audit_safety
from forward_arc.harness import (
    MetricSummary,
    TrialRecord,
    TrialResult,
    aggregate_cell,
    default_matrix,
    derive_seed,
    run_batch,
    run_trial,
    run_trial_detailed,
    trial_config,
)
from forward_arc.planning.errors import ConfigError, InvalidArgumentError
from forward_arc.planning.primitives import ReferenceState
from forward_arc.sim.scenarios import forest_endpoints, gen_dead_end, gen_enclosure

START = (0.0, 0.0, 1.5)
WORKERS = os.cpu_count() or 1
PLAN_BUDGET_MS = 83.0


@pytest.fixture
def base_cfg(camera) -> TrialConfig:
    return TrialConfig(camera=camera, start=START, goal=(10.0, 0.0, 1.5))


def make_result(outcome: Outcome, flight_time: float = 10.0, plan_rounds: int = 4) -> TrialResult:
    return TrialResult(
        outcome=outcome,
        flight_time=flight_time,
        path_length=2.0 * flight_time,
        max_speed=3.0,
        avg_speed=2.0,
        control_effort=5.0,
        plan_rounds=plan_rounds,
        plan_time_mean_ms=2.0,
        plan_time_max_ms=3.0,
        start=START,
        goal=(70.0, 0.0, 1.5),
        final_position=START,
        final_speed=0.0,
        final_clearance=1.5,
        final_distance_to_goal=1.0,
    )


def make_record(trial: int, result: TrialResult | None = None, failure: str | None = None) -> TrialRecord:
    return TrialRecord(
        cell=0,
        trial=trial,
        density=0.05,
        v_x=3.0,
        world_seed=1,
        endpoint=trial,
        result=result,
        failure=failure,
    )


def test_empty_world_reaches_the_goal(base_cfg, empty_world):
    result, run = run_trial_detailed(base_cfg, empty_world, record_trajectory=True)
    assert result.outcome is Outcome.SUCCESS
    assert result.final_distance_to_goal <= base_cfg.planner.goal_radius
    assert result.avg_speed == pytest.approx(result.path_length / result.flight_time)
    straight = np.linalg.norm(np.subtract(result.final_position, result.start))
    assert result.path_length >= straight - 1e-6
    assert result.max_speed <= base_cfg.planner.v_x + 1e-6
    assert result.decision_counts["commit"] >= 1
    assert result.plan_rounds == sum(result.decision_counts.values())
    # executed positions never stray from what a Commit verified
    assert result.safety_deviation <= 0.15 + 1e-6
    assert len(run.trajectory) == len(run.times)
    assert run.rounds


def test_enclosed_robot_times_out_at_rest(camera):
    world = gen_enclosure(START, half_extent=2.0)
    cfg = TrialConfig(camera=camera, start=START, goal=(1.5, 0.0, 1.5), time_limit=1.0)
    result = run_trial(cfg, world)
    assert result.outcome is Outcome.TIMEOUT
    assert result.path_length == 0.0
    assert result.final_speed == 0.0
    assert result.flight_time == pytest.approx(1.0, abs=1.0 / 240.0)


def test_tiny_time_limit(base_cfg, empty_world):
    cfg = base_cfg.model_copy(update={"time_limit": 0.01})
    result = run_trial(cfg, empty_world)
    assert result.outcome is Outcome.TIMEOUT
    assert result.flight_time == pytest.approx(3.0 / 240.0)
    assert result.plan_rounds == 1


def test_spawn_in_collision_is_a_config_error(camera, wall_world):
    cfg = TrialConfig(camera=camera, start=(5.5, 0.0, 1.5), goal=(8.0, 0.0, 1.5))
    with pytest.raises(ConfigError, match="collision"):
        run_trial(cfg, wall_world)
    outside = TrialConfig(camera=camera, start=START, goal=(80.0, 0.0, 1.5))
    with pytest.raises(ConfigError, match="outside"):
        run_trial(outside, wall_world)


def test_goal_in_collision_is_a_config_error(camera, wall_world):
    cfg = TrialConfig(camera=camera, start=START, goal=(5.5, 0.0, 1.5))
    with pytest.raises(ConfigError, match="goal .* is in collision"):
        run_trial(cfg, wall_world)


def dead_end_trial(camera, seed: int) -> None:
    world, start, goal = gen_dead_end(seed)
    cfg = TrialConfig(camera=camera, start=tuple(start.tolist()), goal=tuple(goal.tolist()), time_limit=12.0)
    result = run_trial(cfg, world)
    assert result.outcome is Outcome.TIMEOUT
    assert result.final_speed == pytest.approx(0.0, abs=1e-9)
    assert result.final_clearance >= cfg.planner.r_coll


@pytest.mark.parametrize("seed", range(2))
def test_dead_end_stops_short_of_the_wall(camera, seed):
    dead_end_trial(camera, seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(2, 50))
def test_dead_end_many_seeds(camera, seed):
    dead_end_trial(camera, seed)


def test_metric_summary():
    summary = MetricSummary.of([3.0, 1.0, 10.0, 2.0])
    assert (summary.min, summary.median, summary.mean, summary.max) == (1.0, 2.5, 4.0, 10.0)
    assert summary.values == [3.0, 1.0, 10.0, 2.0]


def test_aggregate_cell_counts_and_rates():
    records = [
        make_record(0, make_result(Outcome.SUCCESS, 20.0)),
        make_record(1, make_result(Outcome.SUCCESS, 30.0)),
        make_record(2, make_result(Outcome.COLLISION, 5.0)),
        make_record(3, make_result(Outcome.TIMEOUT, 60.0, plan_rounds=0)),
        make_record(4, failure="start is in collision"),
    ]
    cell = aggregate_cell(0, 0.05, 3.0, records)
    assert (cell.trials, cell.successes, cell.collisions, cell.timeouts, cell.failures) == (5, 2, 1, 1, 1)
    assert cell.success_rate == pytest.approx(0.5)
    assert cell.collision_rate == pytest.approx(0.25)
    assert cell.timeout_rate == pytest.approx(0.25)
    # metrics come from successful trials only
    assert cell.metrics["flight_time"].values == [20.0, 30.0]
    assert cell.metrics["flight_time"].mean == 25.0
    assert cell.plan_time_mean_ms == pytest.approx(2.0)


def test_aggregate_cell_without_successes():
    cell = aggregate_cell(1, 0.1, 5.0, [make_record(0, failure="bad")])
    assert cell.metrics == {}
    assert cell.success_rate == 0.0
    assert cell.plan_time_mean_ms is None


def test_trial_config_assigns_endpoints_and_seeds(base_cfg):
    configs = [trial_config(base_cfg, 2, 0.075, 5.0, trial) for trial in range(12)]
    start, goal = forest_endpoints()[3]
    assert configs[3].start == tuple(start.tolist())
    assert configs[3].goal == tuple(goal.tolist())
    assert configs[3].planner.v_x == 5.0
    assert configs[3].world.forest.density == 0.075
    # one forest per group of endpoints
    assert len({c.world.seed for c in configs[:10]}) == 1
    assert configs[10].world.seed != configs[0].world.seed
    assert len({c.seed for c in configs}) == 12
    assert trial_config(base_cfg, 2, 0.075, 5.0, 3) == configs[3]


def test_derive_seed_is_stable():
    assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
    assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)
    assert 0 <= derive_seed(7) < 2**32


def test_default_matrix():
    matrix = default_matrix()
    assert len(matrix) == 12
    assert matrix[0] == (0.025, 1.5)
    assert matrix[-1] == (0.1, 5.0)


def test_audit_safety_measures_distance_to_verified_samples():
    samples = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
    segments = [VerifiedSegment(active_start=1.0, samples=samples)]
    times = [0.5, 1.0, 1.5]
    positions = [np.array([9.0, 0.0, 0.0]), np.array([0.0, 0.1, 0.0]), np.array([1.5, 0.0, 0.0])]
    # the hover lead-in before the first active window is skipped
    assert audit_safety(times, positions, segments) == pytest.approx(0.5)
    assert audit_safety(times, positions, []) == 0.0


@pytest.fixture
def batch_cfg(camera) -> TrialConfig:
    return TrialConfig(camera=camera, time_limit=0.5, world=WorldSource(forest=ForestConfig()))


def test_batch_is_deterministic_per_seed(batch_cfg):
    matrix = [(0.05, 3.0), (0.1, 1.5)]
    first = run_batch(matrix, 2, batch_cfg)
    again = run_batch(matrix, 2, batch_cfg)
    assert first.deterministic_dump() == again.deterministic_dump()
    assert len(first.trials) == 4
    assert [c.trials for c in first.cells] == [2, 2]
    assert first.metadata.config_hash == batch_cfg.config_hash()
    assert "plan_time_mean_ms" not in first.deterministic_dump()


def test_parallel_batch_matches_serial(batch_cfg):
    matrix = [(0.05, 3.0)]
    serial = run_batch(matrix, 3, batch_cfg)
    parallel = run_batch(matrix, 3, batch_cfg, parallelism=2)
    assert parallel.deterministic_dump() == serial.deterministic_dump()


def test_failed_trials_are_recorded(batch_cfg):
    cfg = batch_cfg.model_copy(update={"robot_radius": 5.0})
    report = run_batch([(0.05, 3.0)], 2, cfg)
    assert all(r.result is None and "collision" in r.failure for r in report.trials)
    assert report.cells[0].failures == 2
    assert report.cells[0].success_rate == 0.0


def test_batch_rejects_empty_cells(batch_cfg):
    with pytest.raises(InvalidArgumentError):
        run_batch([(0.05, 3.0)], 0, batch_cfg)


@pytest.mark.slow
def test_forest_batch_never_collides():
    matrix = [(density, speed) for density in DEFAULT_DENSITIES for speed in (1.5, 3.0)]
    report = run_batch(matrix, 63, TrialConfig(), parallelism=WORKERS)
    assert len(report.trials) >= 500
    assert sum(cell.failures for cell in report.cells) == 0
    assert sum(cell.collisions for cell in report.cells) == 0


@pytest.mark.slow
def test_success_falls_with_density_and_plans_stay_fast():
    cfg = TrialConfig()
    assert cfg.history_duration * cfg.rates.camera == pytest.approx(30.0)
    assert len(cfg.planner.library(ReferenceState.hover(cfg.start))) == 33

    report = run_batch(default_matrix(), 50, cfg, parallelism=WORKERS)
    success = {(cell.density, cell.v_x): cell.success_rate for cell in report.cells}
    assert success[0.025, 1.5] >= 0.95
    for speed in DEFAULT_SPEEDS:
        rates = [success[density, speed] for density in DEFAULT_DENSITIES]
        for sparser, denser in itertools.pairwise(rates):
            assert denser <= sparser + 0.05
    for cell in report.cells:
        assert cell.plan_time_mean_ms is not None
        assert cell.plan_time_mean_ms < PLAN_BUDGET_MS
