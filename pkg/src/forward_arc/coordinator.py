"""Trial event loop: physics, camera and planner events on one physics clock."""

from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
import logging
import math

import numpy as np
from numpy.typing import NDArray

from .config import TrialConfig
from .planning.errors import ConfigError
from .planning.geometry import RigidTransform
from .planning.memory import FrameChain
from .planning.planner import DecisionKind, PlanDecision, Planner, ReactivePlanner, RoundRecord
from .planning.primitives import ReferenceState
from .planning.schedule import ScheduledTrajectory
from .sim.render import render_depth
from .sim.state import SimState, sim_step
from .sim.world import World, clearance

_LOGGER = logging.getLogger(__name__)

# tolerance when matching event times against the physics clock
CLOCK_TOLERANCE = 1e-9

TRAJECTORY_COLUMNS = ("t", "x", "y", "z", "yaw", "vx", "vy", "vz", "speed", "decision_kind")

PlannerFactory = Callable[[TrialConfig], Planner]


class Outcome(str, Enum):
    """How a trial ended."""

    SUCCESS = "success"
    COLLISION = "collision"
    TIMEOUT = "timeout"


@dataclass(frozen=True, eq=False)
class VerifiedSegment:
    """World positions verified by a Commit, covering the schedule from active_start on."""

    active_start: float
    samples: NDArray[np.float64]


@dataclass
class TrialRun:
    """Everything a finished trial produced."""

    outcome: Outcome
    sim: SimState
    plan_times: list[float] = field(default_factory=list)
    decision_counts: Counter = field(default_factory=Counter)
    rounds: list[RoundRecord] = field(default_factory=list)
    trajectory: list[tuple] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    positions: list[NDArray[np.float64]] = field(default_factory=list)
    segments: list[VerifiedSegment] = field(default_factory=list)
    final_clearance: float = math.inf


def default_planner(cfg: TrialConfig) -> Planner:
    """Return the reactive planner for a trial config."""
    return ReactivePlanner(cfg=cfg.planner)


def body_pose(reference: ReferenceState) -> RigidTransform:
    """Body-to-world pose of a level robot on the reference."""
    return RigidTransform.from_pose(reference.position, reference.yaw)


class TrialCoordinator:
    """Run one trial: render at the camera rate, plan at the planner rate, track the schedule."""

    def __init__(
        self,
        cfg: TrialConfig,
        world: World,
        planner_factory: PlannerFactory = default_planner,
        record_trajectory: bool = False,
    ) -> None:
        """Initialize the coordinator and check the spawn."""
        self.cfg = cfg
        self.world = world
        self.planner = planner_factory(cfg)
        self.record_trajectory = record_trajectory
        self.camera = cfg.camera
        self.chain = FrameChain(cfg.camera, cfg.history_duration, cfg.occlusion_band)
        self.goal = np.asarray(cfg.goal, dtype=np.float64)
        self.start = ReferenceState.hover(cfg.start)
        self.rng = np.random.default_rng(cfg.seed)
        self._sensor_to_body = cfg.camera.body_to_sensor.inverse()
        self._last_sensor_estimate: RigidTransform | None = None
        self._check_spawn()

    def _check_spawn(self) -> None:
        for name, point in (("start", self.cfg.start), ("goal", self.cfg.goal)):
            if not self.world.bounds.contains_point(point):
                msg = f"{name} {point} lies outside the world bounds"
                raise ConfigError(msg)
            if clearance(self.world, point) < self.cfg.robot_radius:
                msg = f"{name} {point} is in collision"
                raise ConfigError(msg)

    def _capture(self, t: float, reference: ReferenceState) -> None:
        """Render a frame at the true pose and push it with the estimated pose."""
        true_pose = body_pose(reference)
        estimate = true_pose
        if self.cfg.pose_noise_std > 0:
            noise = self.rng.normal(0.0, self.cfg.pose_noise_std, 4)
            estimate = RigidTransform.from_pose(reference.position + noise[:3], reference.yaw + noise[3])
        frame = render_depth(
            self.world,
            true_pose @ self._sensor_to_body,
            self.camera,
            stamp=t,
            body_pose=estimate,
            rng=self.rng,
        )
        sensor_estimate = estimate @ self._sensor_to_body
        if self._last_sensor_estimate is None:
            edge = RigidTransform.identity()
        else:
            edge = self._last_sensor_estimate.inverse() @ sensor_estimate
        self.chain.push_frame(frame, edge)
        self._last_sensor_estimate = sensor_estimate

    def run(self) -> TrialRun:
        """Step until the goal is reached, a collision happens or time runs out."""
        cfg = self.cfg
        dt = 1.0 / cfg.rates.physics
        camera_period = 1.0 / cfg.rates.camera
        planner_period = 1.0 / cfg.rates.planner
        time_limit = cfg.effective_time_limit
        _LOGGER.info(
            "Trial started: %s -> %s, time limit %.1f s, %d cylinders",
            cfg.start,
            cfg.goal,
            time_limit,
            len(self.world.cylinders),
        )

        schedule = ScheduledTrajectory.hover(self.start, 0.0)
        sim = SimState.start(self.start)
        run = TrialRun(outcome=Outcome.TIMEOUT, sim=sim)
        last_kind = ""
        next_camera = 0.0
        next_plan = 0.0
        tick = 0
        outcome: Outcome | None = None
        while outcome is None:
            t = tick * dt
            if t >= next_camera - CLOCK_TOLERANCE:
                self._capture(t, sim.reference)
                next_camera += camera_period
            if t >= next_plan - CLOCK_TOLERANCE:
                schedule, decision = self.planner.step(t, schedule, self.chain, self.goal)
                self._record(run, t, decision)
                last_kind = decision.kind.value
                next_plan += planner_period

            sim = sim_step(sim, schedule, dt, self.world, cfg.robot_radius)
            tick += 1
            self._log_step(run, sim, last_kind)

            if np.linalg.norm(sim.reference.position - self.goal) <= cfg.planner.goal_radius:
                outcome = Outcome.SUCCESS
            elif sim.collided:
                outcome = Outcome.COLLISION
            elif sim.time >= time_limit - CLOCK_TOLERANCE:
                outcome = Outcome.TIMEOUT
                _LOGGER.warning("Time limit %.1f s reached", time_limit)

        run.outcome = outcome
        run.sim = sim
        run.final_clearance = clearance(self.world, sim.reference.position)
        _LOGGER.info(
            "Trial finished: %s at t=%.2f s, path %.2f m",
            outcome.value,
            sim.time,
            sim.path_length,
        )
        return run

    def _record(self, run: TrialRun, t: float, decision: PlanDecision) -> None:
        run.decision_counts[decision.kind.value] += 1
        if decision.plan_time is not None:
            run.plan_times.append(decision.plan_time)
        if decision.kind is DecisionKind.COMMIT and decision.verified_samples is not None:
            active_start = t + self.cfg.planner.t_p
            run.segments.append(VerifiedSegment(active_start=active_start, samples=decision.verified_samples))
        if self.record_trajectory:
            run.rounds.append(decision.to_record(t))

    def _log_step(self, run: TrialRun, sim: SimState, last_kind: str) -> None:
        ref = sim.reference
        run.times.append(sim.time)
        run.positions.append(ref.position)
        if self.record_trajectory:
            run.trajectory.append(
                (sim.time, *ref.position.tolist(), ref.yaw, *ref.velocity.tolist(), ref.speed, last_kind)
            )


def audit_safety(
    times: list[float], positions: list[NDArray[np.float64]], segments: list[VerifiedSegment]
) -> float:
    """
    Largest distance from an executed position to the samples verified for it.

    A position at time t belongs to the latest Commit whose active window
    started at or before t. Positions before the first active window are the
    hover start and are skipped.
    """
    if not segments:
        return 0.0
    starts = np.array([s.active_start for s in segments])
    worst = 0.0
    for t, position in zip(times, positions, strict=True):
        index = int(np.searchsorted(starts, t + CLOCK_TOLERANCE, side="right")) - 1
        if index < 0:
            continue
        samples = segments[index].samples
        worst = max(worst, float(np.min(np.linalg.norm(samples - position, axis=1))))
    return worst
