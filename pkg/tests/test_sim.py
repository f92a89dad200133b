import pytest

from forward_arc.planning.errors import InvalidArgumentError
from forward_arc.planning.primitives import BodyCommand, MotionPrimitive, ReferenceState, build_stop
from forward_arc.planning.schedule import ScheduledTrajectory, commit_schedule
from forward_arc.sim.state import SimState, sim_step

RADIUS = 0.15


def fly(sim: SimState, schedule: ScheduledTrajectory, until: float, world, dt: float) -> SimState:
    for _ in range(round((until - sim.time) / dt)):
        sim = sim_step(sim, schedule, dt, world, RADIUS)
    return sim


def test_effort_matches_the_quintic_closed_form(hover_state, empty_world):
    # ramp 0 -> 2 m/s over 1 s, then stop 2 -> 0 over 1 s: each ramp costs (120/7) * dv^2 / T^3
    prim = MotionPrimitive(start=hover_state, command=BodyCommand(v_x=2.0), ramp_duration=1.0)
    stop = build_stop(prim.evaluate(1.0), 1.0)
    schedule = commit_schedule(None, prim, stop, 0.0, 1.0)
    sim = fly(SimState.start(hover_state), schedule, 3.5, empty_world, 1.0 / 2400.0)

    assert sim.effort_accum == pytest.approx(120.0 / 7.0 * 8.0, rel=1e-3)
    assert sim.path_length == pytest.approx(2.0, rel=1e-4)
    assert sim.speed_max == pytest.approx(2.0, rel=1e-6)
    assert sim.reference.speed == pytest.approx(0.0, abs=1e-9)
    assert not sim.collided


def test_hover_accumulates_nothing(hover_state, empty_world):
    hover = ScheduledTrajectory.hover(hover_state, 0.0)
    sim = fly(SimState.start(hover_state), hover, 1.0, empty_world, 0.01)
    assert sim.time == pytest.approx(1.0)
    assert sim.path_length == 0.0
    assert sim.effort_accum == 0.0
    assert sim.speed_max == 0.0


def test_collision_is_sticky(wall_world, empty_world):
    inside = ReferenceState.hover([5.5, 0.0, 1.5])
    sim = sim_step(SimState.start(inside), ScheduledTrajectory.hover(inside, 0.0), 0.01, wall_world, RADIUS)
    assert sim.collided
    outside = ReferenceState.hover([0.0, 0.0, 1.5])
    sim = sim_step(sim, ScheduledTrajectory.hover(outside, 0.0), 0.01, empty_world, RADIUS)
    assert sim.collided


def test_step_rejects_non_positive_dt(hover_state, empty_world):
    sim = SimState.start(hover_state)
    with pytest.raises(InvalidArgumentError):
        sim_step(sim, ScheduledTrajectory.hover(hover_state, 0.0), 0.0, empty_world, RADIUS)
