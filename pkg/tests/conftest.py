"""Shared fixtures."""

import numpy as np
import pytest

from forward_arc.planning.camera import CameraModel
from forward_arc.planning.geometry import RigidTransform
from forward_arc.planning.memory import DepthFrame, FrameChain
from forward_arc.planning.planner import PlannerConfig
from forward_arc.planning.primitives import ReferenceState
from forward_arc.sim.world import Box, World

ALTITUDE = 1.5


@pytest.fixture
def camera() -> CameraModel:
    """Quarter-resolution camera (106x60) with a dense cloud."""
    return CameraModel().scaled(0.25).model_copy(update={"stride": 1})


@pytest.fixture
def planner_cfg() -> PlannerConfig:
    return PlannerConfig()


@pytest.fixture
def hover_state() -> ReferenceState:
    return ReferenceState.hover([0.0, 0.0, ALTITUDE])


@pytest.fixture
def empty_world() -> World:
    return World(bounds=Box(lower=(-50.0, -50.0, -10.0), upper=(50.0, 50.0, 20.0)))


@pytest.fixture
def wall_world() -> World:
    """A wall whose near face is the plane x = 5."""
    return World(
        bounds=Box(lower=(-10.0, -60.0, -60.0), upper=(10.0, 60.0, 60.0)),
        boxes=(Box(lower=(5.0, -50.0, -50.0), upper=(6.0, 50.0, 50.0)),),
    )


def constant_frame(
    camera: CameraModel, depth: float, stamp: float = 0.0, pose: RigidTransform | None = None
) -> DepthFrame:
    return DepthFrame.from_depth(np.full((camera.height, camera.width), depth), camera, stamp, pose=pose)


def single_frame_chain(camera: CameraModel, depth: float, position=(0.0, 0.0, ALTITUDE)) -> FrameChain:
    chain = FrameChain(camera)
    pose = RigidTransform.from_pose(position, 0.0)
    chain.push_frame(constant_frame(camera, depth, pose=pose), RigidTransform.identity())
    return chain


@pytest.fixture
def frame_of(camera):
    """Build a frame with one depth everywhere."""

    def build(depth: float, stamp: float = 0.0, pose: RigidTransform | None = None) -> DepthFrame:
        return constant_frame(camera, depth, stamp, pose)

    return build


@pytest.fixture
def chain_of(camera):
    """Build a one-frame chain with one depth everywhere, seen from a level pose."""

    def build(depth: float, position=(0.0, 0.0, ALTITUDE)) -> FrameChain:
        return single_frame_chain(camera, depth, position)

    return build
