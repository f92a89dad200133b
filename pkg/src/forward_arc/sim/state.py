"""Simulated robot state under ideal tracking."""

from dataclasses import dataclass, replace

from ..planning.errors import InvalidArgumentError
from ..planning.primitives import ReferenceState
from ..planning.schedule import ScheduledTrajectory
from .world import World, gt_collides


@dataclass(frozen=True, eq=False)
class SimState:
    """Robot state: it sits exactly on the reference. Accumulators only grow."""

    time: float
    reference: ReferenceState
    collided: bool = False
    path_length: float = 0.0
    speed_max: float = 0.0
    effort_accum: float = 0.0

    @classmethod
    def start(cls, reference: ReferenceState, time: float = 0.0) -> "SimState":
        """Initial state on a reference."""
        return cls(time=time, reference=reference, speed_max=reference.speed)


def sim_step(
    sim: SimState,
    schedule: ScheduledTrajectory,
    dt: float,
    world: World,
    robot_radius: float,
) -> SimState:
    """Advance by dt along the schedule, integrating path length and squared jerk by the trapezoid rule."""
    if dt <= 0:
        msg = f"dt must be positive, got {dt}"
        raise InvalidArgumentError(msg)
    time = sim.time + dt
    reference = schedule.evaluate(time)
    speed = reference.speed
    jerk_sq = float(reference.jerk @ reference.jerk)
    prev_jerk_sq = float(sim.reference.jerk @ sim.reference.jerk)
    return replace(
        sim,
        time=time,
        reference=reference,
        collided=sim.collided or gt_collides(world, reference.position, robot_radius),
        path_length=sim.path_length + 0.5 * (sim.reference.speed + speed) * dt,
        speed_max=max(sim.speed_max, speed),
        effort_accum=sim.effort_accum + 0.5 * (prev_jerk_sq + jerk_sq) * dt,
    )
