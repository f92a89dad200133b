import numpy as np
from pydantic import ValidationError
import pytest

from forward_arc.planning.geometry import RigidTransform
from forward_arc.planning.memory import FrameChain
from forward_arc.planning.planner import (
    DecisionKind,
    InfeasibleReason,
    Planner,
    PlannerConfig,
    ReactivePlanner,
    check_primitive,
    cost,
    plan_round,
    planner_step,
)
from forward_arc.planning.primitives import build_stop
from forward_arc.planning.schedule import ScheduledTrajectory
from forward_arc.sim.render import render_depth
from forward_arc.sim.world import gen_forest

GOAL = np.array([20.0, 0.0, 1.5])


def test_config_checks_durations_and_sets():
    with pytest.raises(ValidationError):
        PlannerConfig(t_p=2.0, T=2.0)
    with pytest.raises(ValidationError):
        PlannerConfig(delta_t=3.0)
    with pytest.raises(ValidationError):
        PlannerConfig(omega_set=(0.0, 2.0))
    with pytest.raises(ValidationError):
        PlannerConfig(v_z_set=())


def test_library_sizes(planner_cfg, hover_state):
    assert len(planner_cfg.library(hover_state)) == 33
    assert len(PlannerConfig(planar=True).library(hover_state)) == 11
    custom = PlannerConfig(omega_set=(0.5, 0.0, -0.5), v_z_set=(0.0,))
    assert custom.library(hover_state).omega_set == (0.0, -0.5, 0.5)


def test_free_space_commits_straight_primitive(planner_cfg, hover_state, chain_of):
    decision = plan_round(hover_state, chain_of(np.inf), GOAL, planner_cfg)
    assert decision.kind is DecisionKind.COMMIT
    assert decision.selected_index == 0
    assert decision.selected.command.omega == 0.0
    assert decision.selected.command.v_z == 0.0
    assert len(decision.candidates) == 33
    assert decision.verified_samples is not None
    assert decision.stop.start.position == pytest.approx(decision.selected.evaluate(planner_cfg.t_p).position)


def test_empty_chain_means_unknown_space(planner_cfg, hover_state, camera):
    decision = plan_round(hover_state, FrameChain(camera), GOAL, planner_cfg)
    assert decision.kind is DecisionKind.EXECUTE_STOP
    assert decision.stop is None
    assert all(c.reason is InfeasibleReason.UNKNOWN for c in decision.candidates)


def test_wall_prunes_everything(planner_cfg, hover_state, chain_of):
    prev = ScheduledTrajectory.hover(hover_state, 0.0)
    decision = plan_round(hover_state, chain_of(3.0), GOAL, planner_cfg, prev=prev)
    assert decision.kind is DecisionKind.EXECUTE_STOP
    assert decision.stop is prev.stop
    assert decision.candidates[0].reason is InfeasibleReason.OBSTACLE
    assert decision.candidates[0].min_distance < planner_cfg.r_coll


def test_goal_within_radius(planner_cfg, hover_state, chain_of):
    decision = plan_round(hover_state, chain_of(np.inf), hover_state.position + [0.5, 0.0, 0.0], planner_cfg)
    assert decision.kind is DecisionKind.GOAL_REACHED
    assert decision.candidates == ()


def test_check_primitive_and_cost(planner_cfg, hover_state, chain_of):
    prim = planner_cfg.library(hover_state)[0]
    stop = build_stop(prim.evaluate(planner_cfg.t_p), planner_cfg.stop_duration)
    assert check_primitive(chain_of(np.inf), prim, stop, planner_cfg).feasible
    blocked = check_primitive(chain_of(3.0), prim, stop, planner_cfg)
    assert not blocked.feasible
    assert blocked.reason is InfeasibleReason.OBSTACLE
    end = prim.end_state.position
    assert cost(prim, GOAL) == pytest.approx(np.linalg.norm(GOAL - end))


def test_takeoff_exemption(hover_state, chain_of):
    # samples close to the robot are behind the near clip; without the exemption nothing is feasible
    chain = chain_of(np.inf)
    assert plan_round(hover_state, chain, GOAL, PlannerConfig(startup_free_radius=0.0)).kind is (
        DecisionKind.EXECUTE_STOP
    )
    exempt = plan_round(hover_state, chain, GOAL, PlannerConfig(startup_free_radius=1.0))
    assert exempt.kind is DecisionKind.COMMIT


@pytest.mark.parametrize("seed", range(5))
def test_selection_is_the_cheapest_feasible_candidate(planner_cfg, hover_state, camera, seed):
    world = gen_forest(0.1, region=(2.0, 30.0, -10.0, 10.0), seed=seed, keep_clear=[hover_state.position])
    pose = RigidTransform.from_pose(hover_state.position, 0.0)
    chain = FrameChain(camera)
    frame = render_depth(world, pose @ camera.body_to_sensor.inverse(), camera, body_pose=pose)
    chain.push_frame(frame, RigidTransform.identity())

    decision = plan_round(hover_state, chain, GOAL, planner_cfg)
    again = plan_round(hover_state, chain, GOAL, planner_cfg)
    assert [c.model_dump() for c in decision.candidates] == [c.model_dump() for c in again.candidates]
    assert decision.selected_index == again.selected_index

    feasible = [c for c in decision.candidates if c.feasible]
    if not feasible:
        assert decision.kind is DecisionKind.EXECUTE_STOP
        return
    best = min(c.cost for c in feasible)
    assert decision.selected_index == next(c.index for c in feasible if c.cost == best)


def test_reactive_planner_latches_stop(planner_cfg, hover_state, chain_of):
    planner = ReactivePlanner(cfg=planner_cfg)
    assert isinstance(planner, Planner)
    t_p = planner_cfg.t_p
    hover = ScheduledTrajectory.hover(hover_state, 0.0)
    schedule, decision = planner.step(0.0, hover, chain_of(np.inf), GOAL)
    assert decision.kind is DecisionKind.COMMIT
    assert decision.plan_time is not None
    assert schedule.active is decision.selected

    wall = chain_of(3.0)
    stopped, decision = planner.step(t_p, schedule, wall, GOAL)
    assert decision.kind is DecisionKind.EXECUTE_STOP
    assert stopped is schedule
    assert planner.stopping_until == pytest.approx(schedule.stop_end)

    latched, decision = planner_step(2 * t_p, stopped, wall, GOAL, planner)
    assert decision.kind is DecisionKind.EXECUTE_STOP
    assert decision.candidates == ()
    assert latched is schedule

    # once the stop is over the planner plans from hover again
    _, decision = planner.step(schedule.stop_end, schedule, wall, GOAL)
    assert len(decision.candidates) == 33


def test_goal_latch_keeps_schedule(planner_cfg, hover_state, chain_of):
    planner = ReactivePlanner(cfg=planner_cfg)
    schedule = ScheduledTrajectory.hover(hover_state, 0.0)
    goal = hover_state.position + [0.2, 0.0, 0.0]
    for t in (0.0, 0.1, 0.2):
        kept, decision = planner.step(t, schedule, chain_of(np.inf), goal)
        assert decision.kind is DecisionKind.GOAL_REACHED
        assert kept is schedule
    assert planner.goal_reached


def test_round_record_serializes(planner_cfg, hover_state, chain_of):
    decision = plan_round(hover_state, chain_of(np.inf), GOAL, planner_cfg)
    record = decision.to_record(1.25)
    assert record.t == 1.25
    assert record.kind is DecisionKind.COMMIT
    assert '"kind":"commit"' in record.model_dump_json()
