"""Reactive planner: prune the primitive library against the depth memory and commit the cheapest survivor."""

from dataclasses import dataclass, field, replace
from enum import Enum
import logging
import math
import time
from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..const import (
    DEFAULT_DELTA_T,
    DEFAULT_DURATION,
    DEFAULT_GOAL_RADIUS,
    DEFAULT_K,
    DEFAULT_OMEGA_COUNT,
    DEFAULT_OMEGA_MAX,
    DEFAULT_PLANNING_PERIOD,
    DEFAULT_R_COLL,
    DEFAULT_RAMP_DURATION,
    DEFAULT_STARTUP_FREE_RADIUS,
    DEFAULT_STOP_DURATION,
    DEFAULT_VX,
    DEFAULT_VZ_COUNT,
    DEFAULT_VZ_MAX,
)
from .geometry import RigidTransform
from .memory import FrameChain, Verdict
from .primitives import (
    MotionPrimitive,
    PrimitiveLibrary,
    ReferenceState,
    StopPrimitive,
    build_library,
    build_stop,
    sample_points,
    uniform_set,
)
from .schedule import ScheduledTrajectory, commit_schedule

_LOGGER = logging.getLogger(__name__)


class UnknownPolicy(str, Enum):
    """Treatment of samples no frame has observed as free."""

    CONSERVATIVE = "conservative"


class InfeasibleReason(str, Enum):
    """Why a primitive was pruned."""

    OBSTACLE = "obstacle"
    UNKNOWN = "unknown"


class DecisionKind(str, Enum):
    """Outcome of a planning round."""

    COMMIT = "commit"
    EXECUTE_STOP = "execute_stop"
    GOAL_REACHED = "goal_reached"


class PlannerConfig(BaseModel):
    """Planner parameters. Explicit omega_set / v_z_set override the uniform grids."""

    model_config = ConfigDict(frozen=True)

    r_coll: float = Field(default=DEFAULT_R_COLL, gt=0)
    delta_t: float = Field(default=DEFAULT_DELTA_T, gt=0)
    t_p: float = Field(default=DEFAULT_PLANNING_PERIOD, gt=0)
    goal_radius: float = Field(default=DEFAULT_GOAL_RADIUS, gt=0)
    v_x: float = Field(default=DEFAULT_VX, ge=0)
    omega_max: float = Field(default=DEFAULT_OMEGA_MAX, ge=0)
    omega_count: int = Field(default=DEFAULT_OMEGA_COUNT, ge=1)
    vz_max: float = Field(default=DEFAULT_VZ_MAX, ge=0)
    vz_count: int = Field(default=DEFAULT_VZ_COUNT, ge=1)
    omega_set: tuple[float, ...] | None = None
    v_z_set: tuple[float, ...] | None = None
    planar: bool = False
    T: float = Field(default=DEFAULT_DURATION, gt=0)
    ramp_duration: float = Field(default=DEFAULT_RAMP_DURATION, ge=0)
    stop_duration: float = Field(default=DEFAULT_STOP_DURATION, gt=0)
    unknown_policy: UnknownPolicy = UnknownPolicy.CONSERVATIVE
    startup_free_radius: float = Field(default=DEFAULT_STARTUP_FREE_RADIUS, ge=0)
    k: int = Field(default=DEFAULT_K, ge=1)

    @model_validator(mode="after")
    def check_durations(self) -> "PlannerConfig":
        """Ensure delta_t <= T, t_p < T and ramp_duration <= T."""
        if self.delta_t > self.T:
            msg = f"delta_t ({self.delta_t}) must not exceed T ({self.T})"
            raise ValueError(msg)
        if not self.t_p < self.T:
            msg = f"t_p ({self.t_p}) must be below T ({self.T})"
            raise ValueError(msg)
        if self.ramp_duration > self.T:
            msg = f"ramp_duration ({self.ramp_duration}) must not exceed T ({self.T})"
            raise ValueError(msg)
        for name, values, bound in (
            ("omega_set", self.omega_set, self.omega_max),
            ("v_z_set", self.v_z_set, self.vz_max),
        ):
            if values is not None and (not values or any(abs(x) > bound for x in values)):
                msg = f"{name} must be non-empty and within +-{bound}, got {values}"
                raise ValueError(msg)
        return self

    @property
    def omegas(self) -> tuple[float, ...]:
        """Return the yaw-rate set."""
        if self.omega_set is not None:
            return self.omega_set
        return uniform_set(self.omega_max, self.omega_count)

    @property
    def v_zs(self) -> tuple[float, ...]:
        """Return the vertical-speed set; {0} for the planar library."""
        if self.planar:
            return (0.0,)
        if self.v_z_set is not None:
            return self.v_z_set
        return uniform_set(self.vz_max, self.vz_count)

    def library(self, start: ReferenceState) -> PrimitiveLibrary:
        """Build the primitive library from a start state."""
        return build_library(
            start,
            self.v_x,
            self.omegas,
            self.v_zs,
            self.T,
            self.ramp_duration,
            omega_max=self.omega_max,
            vz_max=self.vz_max,
        )


@dataclass(frozen=True)
class Feasibility:
    """Verdict for a (primitive, stop) pair."""

    feasible: bool
    reason: InfeasibleReason | None = None
    min_distance: float = math.inf


class CandidateRecord(BaseModel):
    """Per-primitive diagnostics of one round."""

    index: int
    omega: float
    v_z: float
    feasible: bool
    reason: InfeasibleReason | None = None
    cost: float
    min_distance: float | None = None


class RoundRecord(BaseModel):
    """One planning round, serialized one per line for the harness."""

    t: float
    kind: DecisionKind
    selected_index: int | None = None
    plan_time_ms: float | None = None
    candidates: list[CandidateRecord] = Field(default_factory=list)


@dataclass(frozen=True, eq=False)
class PlanDecision:
    """
    Result of a planning round.

    A Commit carries the selected primitive, its verified stop and the world
    positions that were verified for both. An ExecuteStop carries the stop
    that was already committed, if any.
    """

    kind: DecisionKind
    selected: MotionPrimitive | None = None
    stop: StopPrimitive | None = None
    selected_index: int | None = None
    candidates: tuple[CandidateRecord, ...] = ()
    verified_samples: NDArray[np.float64] | None = None
    plan_time: float | None = None

    def to_record(self, t_now: float) -> RoundRecord:
        """Return the diagnostics record for this decision."""
        return RoundRecord(
            t=t_now,
            kind=self.kind,
            selected_index=self.selected_index,
            plan_time_ms=None if self.plan_time is None else self.plan_time * 1e3,
            candidates=list(self.candidates),
        )


def _primitive_samples(prim: MotionPrimitive, stop: StopPrimitive, delta_t: float) -> NDArray[np.float64]:
    """World positions checked for a primitive and its stop."""
    _, prim_points = sample_points(prim, delta_t)
    _, stop_points = sample_points(stop, delta_t)
    return np.concatenate([prim_points, stop_points])


def _world_to_body(chain: FrameChain) -> RigidTransform | None:
    newest = chain.newest
    return None if newest is None else newest.pose.inverse()


def _judge(
    chain: FrameChain,
    points_W: NDArray[np.float64],
    cfg: PlannerConfig,
    robot_position: NDArray[np.float64],
) -> list[Feasibility]:
    """Per-point classification in one chain query, folded into one Feasibility per point."""
    world_to_body = _world_to_body(chain)
    if world_to_body is None:
        verdicts = [Verdict.UNKNOWN] * len(points_W)
        distances = [math.inf] * len(points_W)
    else:
        results = chain.query_many(world_to_body.apply(points_W), cfg.k, cfg.r_coll)
        verdicts = [r.verdict for r in results]
        distances = [r.distance for r in results]
    exempt = np.linalg.norm(points_W - robot_position, axis=1) <= cfg.startup_free_radius
    judged = []
    for verdict, distance, is_exempt in zip(verdicts, distances, exempt, strict=True):
        if verdict is Verdict.NEAR_OBSTACLE:
            judged.append(
                Feasibility(feasible=False, reason=InfeasibleReason.OBSTACLE, min_distance=distance)
            )
        elif verdict is Verdict.UNKNOWN and not is_exempt:
            judged.append(Feasibility(feasible=False, reason=InfeasibleReason.UNKNOWN))
        else:
            judged.append(Feasibility(feasible=True, min_distance=distance))
    return judged


def _fold(judged: list[Feasibility]) -> Feasibility:
    """Combine per-sample verdicts; an obstacle outranks unknown space."""
    min_distance = min((j.min_distance for j in judged), default=math.inf)
    reasons = {j.reason for j in judged if not j.feasible}
    if InfeasibleReason.OBSTACLE in reasons:
        return Feasibility(feasible=False, reason=InfeasibleReason.OBSTACLE, min_distance=min_distance)
    if InfeasibleReason.UNKNOWN in reasons:
        return Feasibility(feasible=False, reason=InfeasibleReason.UNKNOWN, min_distance=min_distance)
    return Feasibility(feasible=True, min_distance=min_distance)


def check_primitive(
    chain: FrameChain,
    prim: MotionPrimitive,
    stop: StopPrimitive,
    cfg: PlannerConfig,
    robot_position: ArrayLike | None = None,
) -> Feasibility:
    """
    Check a primitive and its stop against the frame chain.

    Both are sampled every delta_t with their terminal points included. Every
    sample must be observed free with clearance of at least r_coll, except
    unobserved samples within startup_free_radius of robot_position (the
    primitive start when not given).
    """
    position = prim.start.position if robot_position is None else np.asarray(robot_position, dtype=np.float64)
    return _fold(_judge(chain, _primitive_samples(prim, stop, cfg.delta_t), cfg, position))


def cost(prim: MotionPrimitive, goal: ArrayLike) -> float:
    """Euclidean distance from the primitive's end to the goal."""
    end = prim.positions(np.array([prim.duration]))[0]
    return float(np.linalg.norm(np.asarray(goal, dtype=np.float64) - end))


def plan_round(
    state_at_handoff: ReferenceState,
    chain: FrameChain,
    goal: ArrayLike,
    cfg: PlannerConfig,
    prev: ScheduledTrajectory | None = None,
    robot_position: ArrayLike | None = None,
) -> PlanDecision:
    """
    Run one planning round from the handoff state.

    Every candidate is checked together with the stop that would follow its
    executed window. The feasible candidate with the lowest cost is committed,
    ties going to the earlier library index. With no feasible candidate the
    stop committed with prev runs instead.
    """
    goal_W = np.asarray(goal, dtype=np.float64)
    if np.linalg.norm(goal_W - state_at_handoff.position) <= cfg.goal_radius:
        return PlanDecision(kind=DecisionKind.GOAL_REACHED)

    position = (
        state_at_handoff.position if robot_position is None else np.asarray(robot_position, dtype=np.float64)
    )
    library = cfg.library(state_at_handoff)
    stops = [build_stop(prim.evaluate(cfg.t_p), cfg.stop_duration) for prim in library]
    sample_sets = [
        _primitive_samples(prim, stop, cfg.delta_t) for prim, stop in zip(library, stops, strict=True)
    ]
    judged = _judge(chain, np.concatenate(sample_sets), cfg, position)

    candidates = []
    best: int | None = None
    best_cost = math.inf
    offset = 0
    for index, (prim, samples) in enumerate(zip(library, sample_sets, strict=True)):
        verdict = _fold(judged[offset : offset + len(samples)])
        offset += len(samples)
        prim_cost = cost(prim, goal_W)
        candidates.append(
            CandidateRecord(
                index=index,
                omega=prim.command.omega,
                v_z=prim.command.v_z,
                feasible=verdict.feasible,
                reason=verdict.reason,
                cost=prim_cost,
                min_distance=verdict.min_distance if math.isfinite(verdict.min_distance) else None,
            )
        )
        if verdict.feasible and prim_cost < best_cost:
            best, best_cost = index, prim_cost

    if best is None:
        _LOGGER.debug("No feasible primitive among %d candidates", len(library))
        return PlanDecision(
            kind=DecisionKind.EXECUTE_STOP,
            stop=None if prev is None else prev.stop,
            candidates=tuple(candidates),
        )
    return PlanDecision(
        kind=DecisionKind.COMMIT,
        selected=library[best],
        stop=stops[best],
        selected_index=best,
        candidates=tuple(candidates),
        verified_samples=sample_sets[best],
    )


@runtime_checkable
class Planner(Protocol):
    """Decision function the trial loop calls once per planning period."""

    def step(
        self, t_now: float, schedule: ScheduledTrajectory, chain: FrameChain, goal: ArrayLike
    ) -> tuple[ScheduledTrajectory, PlanDecision]:
        """Plan from the schedule's handoff state and return the updated schedule."""
        ...


@dataclass
class ReactivePlanner:
    """
    Receding-horizon planner over the forward-arc library.

    Must be driven from a single thread; it owns the stop/goal latches.
    """

    cfg: PlannerConfig = field(default_factory=PlannerConfig)
    goal_reached: bool = False
    stopping_until: float | None = None

    def step(
        self, t_now: float, schedule: ScheduledTrajectory, chain: FrameChain, goal: ArrayLike
    ) -> tuple[ScheduledTrajectory, PlanDecision]:
        """
        Plan one round and update the schedule.

        Raises:
            StartMismatchError: if a committed primitive does not continue the schedule.
        """
        if self.goal_reached:
            return schedule, PlanDecision(kind=DecisionKind.GOAL_REACHED)
        t_handoff = t_now + self.cfg.t_p
        if self.stopping_until is not None:
            if t_handoff < self.stopping_until:
                return schedule, PlanDecision(kind=DecisionKind.EXECUTE_STOP, stop=schedule.stop)
            _LOGGER.debug("Stop finished at %.3f, planning from hover", self.stopping_until)
            self.stopping_until = None

        state = schedule.evaluate(t_handoff)
        start = time.perf_counter()
        decision = plan_round(
            state, chain, goal, self.cfg, prev=schedule, robot_position=schedule.evaluate(t_now).position
        )
        decision = replace(decision, plan_time=time.perf_counter() - start)

        match decision.kind:
            case DecisionKind.COMMIT:
                schedule = commit_schedule(schedule, decision.selected, decision.stop, t_now, self.cfg.t_p)
            case DecisionKind.EXECUTE_STOP:
                if schedule.active is not None:
                    self.stopping_until = schedule.stop_end
                _LOGGER.debug("No feasible primitive at t=%.3f, executing committed stop", t_now)
            case DecisionKind.GOAL_REACHED:
                self.goal_reached = True
                _LOGGER.debug("Goal reached at t=%.3f", t_now)
        return schedule, decision


def planner_step(
    t_now: float,
    robot_schedule: ScheduledTrajectory,
    chain: FrameChain,
    goal: ArrayLike,
    planner: ReactivePlanner,
) -> tuple[ScheduledTrajectory, PlanDecision]:
    """Advance a planner by one round."""
    return planner.step(t_now, robot_schedule, chain, goal)
