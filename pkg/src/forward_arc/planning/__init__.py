"""Forward-arc motion primitive planning library."""

from .camera import CameraModel, Extrinsic, NoReturnPolicy, project
from .errors import (
    ConfigError,
    ForwardArcError,
    InvalidArgumentError,
    OutOfOrderStampError,
    ReportError,
    StartMismatchError,
)
from .geometry import RigidTransform, wrap_angle
from .memory import DepthFrame, FrameChain, FrameVerdict, QueryResult, Verdict, classify_in_frame, knn, query
from .planner import (
    DecisionKind,
    Feasibility,
    InfeasibleReason,
    PlanDecision,
    Planner,
    PlannerConfig,
    ReactivePlanner,
    RoundRecord,
    check_primitive,
    cost,
    plan_round,
    planner_step,
)
from .primitives import (
    BodyCommand,
    FlatState,
    MotionPrimitive,
    PrimitiveLibrary,
    ReferenceState,
    StopPrimitive,
    build_library,
    build_stop,
    eval_reference,
    propagate_flat,
)
from .schedule import ScheduledTrajectory, commit_schedule

__all__ = [
    "BodyCommand",
    "CameraModel",
    "ConfigError",
    "DecisionKind",
    "DepthFrame",
    "Extrinsic",
    "Feasibility",
    "FlatState",
    "ForwardArcError",
    "FrameChain",
    "FrameVerdict",
    "InfeasibleReason",
    "InvalidArgumentError",
    "MotionPrimitive",
    "NoReturnPolicy",
    "OutOfOrderStampError",
    "PlanDecision",
    "Planner",
    "PlannerConfig",
    "PrimitiveLibrary",
    "QueryResult",
    "ReactivePlanner",
    "ReferenceState",
    "ReportError",
    "RigidTransform",
    "RoundRecord",
    "ScheduledTrajectory",
    "StartMismatchError",
    "StopPrimitive",
    "Verdict",
    "build_library",
    "build_stop",
    "check_primitive",
    "classify_in_frame",
    "commit_schedule",
    "cost",
    "eval_reference",
    "knn",
    "plan_round",
    "planner_step",
    "project",
    "propagate_flat",
    "query",
    "wrap_angle",
]
