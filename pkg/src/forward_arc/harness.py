"""Single trials, density x speed batches and their aggregation."""

from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
import json
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .config import ForestConfig, TrialConfig, WorldSource
from .const import DEFAULT_DENSITIES, DEFAULT_SPEEDS, FOREST_ENDPOINTS, VERSION
from .coordinator import Outcome, PlannerFactory, TrialCoordinator, TrialRun, audit_safety, default_planner
from .planning.errors import ConfigError, InvalidArgumentError
from .sim.scenarios import forest_endpoints
from .sim.world import World

_LOGGER = logging.getLogger(__name__)

Vec3 = tuple[float, float, float]

METRIC_NAMES = ("flight_time", "path_length", "max_speed", "avg_speed", "control_effort")
TIMING_FIELDS = {"plan_time_mean_ms", "plan_time_max_ms"}


class TrialResult(BaseModel):
    """Outcome and metrics of one trial."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    outcome: Outcome
    flight_time: float
    path_length: float
    max_speed: float
    avg_speed: float
    control_effort: float
    decision_counts: dict[str, int] = Field(default_factory=dict)
    plan_rounds: int = 0
    plan_time_mean_ms: float | None = None
    plan_time_max_ms: float | None = None
    start: Vec3
    goal: Vec3
    final_position: Vec3
    final_speed: float
    final_clearance: float
    final_distance_to_goal: float
    safety_deviation: float = 0.0


class TrialRecord(BaseModel):
    """A batch trial: its place in the matrix and its result, or why it could not run."""

    cell: int
    trial: int
    density: float
    v_x: float
    world_seed: int
    endpoint: int
    result: TrialResult | None = None
    failure: str | None = None


class MetricSummary(BaseModel):
    """Distribution of one metric."""

    min: float
    median: float
    mean: float
    max: float
    values: list[float]

    @classmethod
    def of(cls, values: Sequence[float]) -> "MetricSummary":
        """Summarize a non-empty sequence."""
        arr = np.asarray(values, dtype=np.float64)
        return cls(
            min=float(arr.min()),
            median=float(np.median(arr)),
            mean=float(arr.mean()),
            max=float(arr.max()),
            values=[float(v) for v in arr],
        )


class CellReport(BaseModel):
    """Aggregate of one (density, speed) cell. Rates are over completed trials, metrics over successes."""

    cell: int
    density: float
    v_x: float
    trials: int
    successes: int
    collisions: int
    timeouts: int
    failures: int
    success_rate: float
    collision_rate: float
    timeout_rate: float
    plan_time_mean_ms: float | None = None
    metrics: dict[str, MetricSummary] = Field(default_factory=dict)


class RunMetadata(BaseModel):
    """What produced a report."""

    version: str = VERSION
    config_hash: str
    seed: int
    trials_per_cell: int
    matrix: list[tuple[float, float]]


class BatchReport(BaseModel):
    """Per-trial records, per-cell aggregates and run metadata."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    metadata: RunMetadata
    cells: list[CellReport]
    trials: list[TrialRecord]

    def deterministic_dump(self) -> str:
        """JSON form without wall-clock timings, identical across reruns of the same seed."""
        data = self.model_dump(mode="json")
        for cell in data["cells"]:
            cell.pop("plan_time_mean_ms", None)
        for record in data["trials"]:
            if record["result"] is not None:
                for key in TIMING_FIELDS:
                    record["result"].pop(key, None)
        return json.dumps(data, sort_keys=True)


def summarize(cfg: TrialConfig, run: TrialRun) -> TrialResult:
    """Build the trial result from a finished run."""
    sim = run.sim
    flight_time = sim.time
    position = sim.reference.position
    plan_times = np.asarray(run.plan_times) * 1e3
    return TrialResult(
        outcome=run.outcome,
        flight_time=flight_time,
        path_length=sim.path_length,
        max_speed=sim.speed_max,
        avg_speed=sim.path_length / flight_time if flight_time > 0 else 0.0,
        control_effort=sim.effort_accum,
        decision_counts=dict(run.decision_counts),
        plan_rounds=len(plan_times),
        plan_time_mean_ms=float(plan_times.mean()) if len(plan_times) else None,
        plan_time_max_ms=float(plan_times.max()) if len(plan_times) else None,
        start=cfg.start,
        goal=cfg.goal,
        final_position=tuple(position.tolist()),
        final_speed=sim.reference.speed,
        final_clearance=run.final_clearance,
        final_distance_to_goal=float(np.linalg.norm(position - np.asarray(cfg.goal))),
        safety_deviation=audit_safety(run.times, run.positions, run.segments),
    )


def run_trial_detailed(
    cfg: TrialConfig,
    world: World | None = None,
    planner_factory: PlannerFactory = default_planner,
    record_trajectory: bool = False,
) -> tuple[TrialResult, TrialRun]:
    """Run one trial and return its result with the raw run."""
    world = cfg.build_world() if world is None else world
    coordinator = TrialCoordinator(cfg, world, planner_factory, record_trajectory=record_trajectory)
    run = coordinator.run()
    return summarize(cfg, run), run


def run_trial(
    cfg: TrialConfig,
    world: World | None = None,
    planner_factory: PlannerFactory = default_planner,
) -> TrialResult:
    """
    Run one trial.

    Raises:
        ConfigError: if the world cannot be built or the spawn is invalid.
    """
    result, _ = run_trial_detailed(cfg, world, planner_factory)
    return result


def derive_seed(*entropy: int) -> int:
    """Deterministic 32-bit seed from integer entropy."""
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


def trial_config(base: TrialConfig, cell: int, density: float, v_x: float, trial: int) -> TrialConfig:
    """Config of trial `trial` in a cell: world seed per group of endpoints, endpoint by index."""
    start, goal = forest_endpoints()[trial % FOREST_ENDPOINTS]
    forest = base.world.forest or ForestConfig()
    return base.model_copy(
        update={
            "world": WorldSource(
                seed=derive_seed(base.seed, cell, trial // FOREST_ENDPOINTS),
                forest=forest.model_copy(update={"density": density}),
            ),
            "start": tuple(start.tolist()),
            "goal": tuple(goal.tolist()),
            "planner": base.planner.model_copy(update={"v_x": v_x}),
            "seed": derive_seed(base.seed, cell, trial),
        }
    )


def _run_job(job: tuple[TrialConfig, int, float, float, int]) -> TrialRecord:
    base, cell, density, v_x, trial = job
    cfg = trial_config(base, cell, density, v_x, trial)
    record = TrialRecord(
        cell=cell,
        trial=trial,
        density=density,
        v_x=v_x,
        world_seed=cfg.world.seed,
        endpoint=trial % FOREST_ENDPOINTS,
    )
    try:
        result = run_trial(cfg)
    except ConfigError as e:
        _LOGGER.warning("Trial %d of cell %d failed: %s", trial, cell, e)
        return record.model_copy(update={"failure": str(e)})
    return record.model_copy(update={"result": result})


def aggregate_cell(cell: int, density: float, v_x: float, records: Iterable[TrialRecord]) -> CellReport:
    """Reduce the records of one cell."""
    records = list(records)
    results = [r.result for r in records if r.result is not None]
    counts = {outcome: sum(1 for r in results if r.outcome is outcome) for outcome in Outcome}
    completed = len(results)
    successes = [r for r in results if r.outcome is Outcome.SUCCESS]
    metrics = {}
    if successes:
        metrics = {name: MetricSummary.of([getattr(r, name) for r in successes]) for name in METRIC_NAMES}
    rounds = sum(r.plan_rounds for r in results)
    plan_time = None
    if rounds:
        plan_time = sum((r.plan_time_mean_ms or 0.0) * r.plan_rounds for r in results) / rounds
    return CellReport(
        cell=cell,
        density=density,
        v_x=v_x,
        trials=len(records),
        successes=counts[Outcome.SUCCESS],
        collisions=counts[Outcome.COLLISION],
        timeouts=counts[Outcome.TIMEOUT],
        failures=len(records) - completed,
        success_rate=counts[Outcome.SUCCESS] / completed if completed else 0.0,
        collision_rate=counts[Outcome.COLLISION] / completed if completed else 0.0,
        timeout_rate=counts[Outcome.TIMEOUT] / completed if completed else 0.0,
        plan_time_mean_ms=plan_time,
        metrics=metrics,
    )


def default_matrix() -> list[tuple[float, float]]:
    """Return the density x speed grid."""
    return [(density, speed) for density in DEFAULT_DENSITIES for speed in DEFAULT_SPEEDS]


def run_batch(
    matrix: Sequence[tuple[float, float]],
    trials_per_cell: int,
    base: TrialConfig,
    parallelism: int = 1,
) -> BatchReport:
    """
    Run every cell of a (density, v_x) matrix.

    Trials are independent and run in worker processes when parallelism > 1;
    results come back in submission order, so the report does not depend on
    the worker count.
    """
    if trials_per_cell < 1:
        msg = f"trials_per_cell must be at least 1, got {trials_per_cell}"
        raise InvalidArgumentError(msg)
    jobs = [
        (base, cell, float(density), float(v_x), trial)
        for cell, (density, v_x) in enumerate(matrix)
        for trial in range(trials_per_cell)
    ]
    _LOGGER.info("Batch of %d cells x %d trials on %d worker(s)", len(matrix), trials_per_cell, parallelism)
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(_run_job, jobs))
    else:
        records = [_run_job(job) for job in jobs]

    cells = []
    for cell, (density, v_x) in enumerate(matrix):
        report = aggregate_cell(cell, float(density), float(v_x), (r for r in records if r.cell == cell))
        _LOGGER.info(
            "Cell %d (density %.3f, v_x %.1f): success %.2f, collision %.2f, timeout %.2f",
            cell,
            density,
            v_x,
            report.success_rate,
            report.collision_rate,
            report.timeout_rate,
        )
        cells.append(report)
    metadata = RunMetadata(
        config_hash=base.config_hash(),
        seed=base.seed,
        trials_per_cell=trials_per_cell,
        matrix=[(float(d), float(v)) for d, v in matrix],
    )
    return BatchReport(metadata=metadata, cells=cells, trials=records)
