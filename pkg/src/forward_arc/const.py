"""Constants for forward_arc."""

from typing import Final

VERSION: Final = "0.1.0"

# environment variable naming the default output directory
ENV_OUTPUT_DIR: Final = "FORWARD_ARC_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR: Final = "runs"

# rates
DEFAULT_PHYSICS_RATE: Final = 240.0  # Hz
DEFAULT_CAMERA_RATE: Final = 30.0  # Hz
DEFAULT_PLANNER_RATE: Final = 12.0  # Hz

# primitive library
OMEGA_EPSILON: Final = 1e-6  # rad/s, straight-line branch of the unicycle solution
DEFAULT_OMEGA_MAX: Final = 1.2  # rad/s
DEFAULT_OMEGA_COUNT: Final = 11
DEFAULT_VZ_MAX: Final = 0.5  # m/s
DEFAULT_VZ_COUNT: Final = 3
DEFAULT_VX: Final = 3.0  # m/s
DEFAULT_DURATION: Final = 2.0  # seconds, primitive duration T
DEFAULT_RAMP_DURATION: Final = 0.3  # seconds
DEFAULT_STOP_DURATION: Final = 2.0  # seconds
DEFAULT_PLANNING_PERIOD: Final = 1.0 / DEFAULT_PLANNER_RATE
START_TOLERANCE: Final = 1e-9  # per component, schedule junction check

# planner
DEFAULT_R_COLL: Final = 0.6  # m
DEFAULT_DELTA_T: Final = 0.1  # s
DEFAULT_GOAL_RADIUS: Final = 1.0  # m
DEFAULT_STARTUP_FREE_RADIUS: Final = 1.0  # m
DEFAULT_K: Final = 1

# depth memory
DEFAULT_HISTORY: Final = 1.0  # s
DEFAULT_OCCLUSION_BAND: Final = 0.1  # m
DEFAULT_EDGE_MARGIN: Final = 2.0  # px
DEFAULT_STRIDE: Final = 4  # px
STAMP_TOLERANCE: Final = 1e-9  # s

# camera (forward-facing, 424x240)
DEFAULT_WIDTH: Final = 424
DEFAULT_HEIGHT: Final = 240
DEFAULT_FOCAL: Final = 215.0  # px
DEFAULT_D_MIN: Final = 0.2  # m
DEFAULT_D_MAX: Final = 10.0  # m, sensing range

# world / simulation
DEFAULT_ROBOT_RADIUS: Final = 0.25  # m
DEFAULT_OBSTACLE_DIAMETER: Final = 0.75  # m
DEFAULT_MIN_SEPARATION: Final = 2.0  # m
DEFAULT_SPAWN_RADIUS: Final = 3.0  # m
DEFAULT_OBSTACLE_HEIGHT: Final = 10.0  # m
DEFAULT_FLIGHT_ALTITUDE: Final = 1.5  # m
FOREST_LENGTH: Final = 70.0  # m, start-goal separation
FOREST_WIDTH: Final = 40.0  # m
FOREST_ENDPOINTS: Final = 10
PACKING_WARN_RATIO: Final = 0.9
WORLD_FILE_VERSION: Final = 1

# harness
TIME_LIMIT_FACTOR: Final = 2.5
DEFAULT_DENSITIES: Final = (0.025, 0.05, 0.075, 0.1)  # obstacles/m^2
DEFAULT_SPEEDS: Final = (1.5, 3.0, 5.0)  # m/s
