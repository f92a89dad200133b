"""Trial configuration models and config file loading."""

import hashlib
import json
import logging
from pathlib import Path
import tomllib
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .const import (
    DEFAULT_CAMERA_RATE,
    DEFAULT_HISTORY,
    DEFAULT_MIN_SEPARATION,
    DEFAULT_OBSTACLE_DIAMETER,
    DEFAULT_OBSTACLE_HEIGHT,
    DEFAULT_OCCLUSION_BAND,
    DEFAULT_PHYSICS_RATE,
    DEFAULT_PLANNER_RATE,
    DEFAULT_ROBOT_RADIUS,
    DEFAULT_SPAWN_RADIUS,
    TIME_LIMIT_FACTOR,
)
from .planning.camera import CameraModel
from .planning.errors import ConfigError, ReportError
from .planning.planner import PlannerConfig
from .sim.world import World, forest_region, gen_forest, load_world

_LOGGER = logging.getLogger(__name__)

Vec3 = tuple[float, float, float]

LOG_LEVELS = ("critical", "error", "warning", "info", "debug")


class RatesConfig(BaseModel):
    """Physics, camera and planner rates (Hz) on the physics clock."""

    model_config = ConfigDict(frozen=True)

    physics: float = Field(default=DEFAULT_PHYSICS_RATE, gt=0)
    camera: float = Field(default=DEFAULT_CAMERA_RATE, gt=0)
    planner: float = Field(default=DEFAULT_PLANNER_RATE, gt=0)

    @model_validator(mode="after")
    def check_order(self) -> "RatesConfig":
        """Camera and planner cannot run faster than physics."""
        if self.camera > self.physics or self.planner > self.physics:
            msg = (
                f"camera ({self.camera} Hz) and planner ({self.planner} Hz) "
                f"must not exceed physics ({self.physics} Hz)"
            )
            raise ValueError(msg)
        return self


class ForestConfig(BaseModel):
    """Procedural forest parameters."""

    model_config = ConfigDict(frozen=True)

    density: float = Field(default=0.05, ge=0)
    diameter: float = Field(default=DEFAULT_OBSTACLE_DIAMETER, gt=0)
    min_separation: float = DEFAULT_MIN_SEPARATION
    spawn_radius: float = Field(default=DEFAULT_SPAWN_RADIUS, ge=0)
    height: float = Field(default=DEFAULT_OBSTACLE_HEIGHT, gt=0)
    region: tuple[float, float, float, float] = forest_region()

    @model_validator(mode="after")
    def check_separation(self) -> "ForestConfig":
        """Ensure min_separation >= diameter and a non-empty region."""
        if self.min_separation < self.diameter:
            msg = f"min_separation ({self.min_separation}) must be at least the diameter ({self.diameter})"
            raise ValueError(msg)
        x0, x1, y0, y1 = self.region
        if not (x0 < x1 and y0 < y1):
            msg = f"region must be (x0, x1, y0, y1) with x0 < x1 and y0 < y1, got {self.region}"
            raise ValueError(msg)
        return self


class WorldSource(BaseModel):
    """Either a generated forest (seed + parameters) or a world file."""

    model_config = ConfigDict(frozen=True)

    seed: int | None = 0
    forest: ForestConfig | None = None
    file: Path | None = None

    @model_validator(mode="after")
    def check_exclusive(self) -> "WorldSource":
        """Exactly one of forest or file."""
        if (self.forest is None) == (self.file is None):
            msg = "world needs exactly one of 'forest' (with 'seed') or 'file'"
            raise ValueError(msg)
        if self.forest is not None and self.seed is None:
            msg = "a generated forest needs a seed"
            raise ValueError(msg)
        return self

    def build(self, keep_clear: tuple[Vec3, ...] = ()) -> World:
        """Generate or load the world."""
        if self.file is not None:
            return load_world(self.file)
        forest = self.forest
        return gen_forest(
            forest.density,
            region=forest.region,
            diameter=forest.diameter,
            min_separation=forest.min_separation,
            seed=self.seed,
            keep_clear=keep_clear,
            spawn_radius=forest.spawn_radius,
            height=forest.height,
        )


class LoggingConfig(BaseModel):
    """Log levels: a default and per-logger overrides."""

    model_config = ConfigDict(frozen=True)

    default: str = "info"
    logs: dict[str, str] = Field(default_factory=dict)

    @field_validator("default")
    @classmethod
    def check_default(cls, value: str) -> str:
        """Ensure the default level is known."""
        return _check_level(value)

    @field_validator("logs")
    @classmethod
    def check_logs(cls, value: dict[str, str]) -> dict[str, str]:
        """Ensure every per-logger level is known."""
        return {name: _check_level(level) for name, level in value.items()}


def _check_level(value: str) -> str:
    level = value.lower()
    if level not in LOG_LEVELS:
        msg = f"unknown log level {value!r}, expected one of {', '.join(LOG_LEVELS)}"
        raise ValueError(msg)
    return level


class TrialConfig(BaseModel):
    """
    A single trial.

    The planner's t_p defaults to the planner period 1 / rates.planner, and
    time_limit to 2.5 times the straight-line flight time at v_x.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    world: WorldSource = Field(default_factory=lambda: WorldSource(forest=ForestConfig()))
    start: Vec3 = (0.0, 0.0, 1.5)
    goal: Vec3 = (70.0, 0.0, 1.5)
    time_limit: float | None = Field(default=None, gt=0)
    planner: PlannerConfig = Field(default_factory=PlannerConfig)
    camera: CameraModel = Field(default_factory=CameraModel)
    rates: RatesConfig = Field(default_factory=RatesConfig)
    robot_radius: float = Field(default=DEFAULT_ROBOT_RADIUS, gt=0)
    history_duration: float = Field(default=DEFAULT_HISTORY, gt=0)
    occlusion_band: float = Field(default=DEFAULT_OCCLUSION_BAND, ge=0)
    pose_noise_std: float = Field(default=0.0, ge=0)
    seed: int = 0
    logging_config: LoggingConfig = Field(default_factory=LoggingConfig, alias="logging")

    @model_validator(mode="before")
    @classmethod
    def fill_planning_period(cls, data: Any) -> Any:
        """Default the planner's t_p to the planner period."""
        if not isinstance(data, dict):
            return data
        planner = data.get("planner")
        if planner is None or isinstance(planner, dict):
            planner = dict(planner or {})
            if "t_p" not in planner:
                rates = data.get("rates") or {}
                if isinstance(rates, RatesConfig):
                    rate = rates.planner
                else:
                    rate = rates.get("planner", DEFAULT_PLANNER_RATE)
                planner["t_p"] = 1.0 / rate
            data = {**data, "planner": planner}
        return data

    @model_validator(mode="after")
    def check_endpoints(self) -> "TrialConfig":
        """Ensure a reachable goal and a positive default time limit."""
        if np.allclose(self.start, self.goal):
            msg = "start and goal must differ"
            raise ValueError(msg)
        if self.time_limit is None and self.planner.v_x <= 0:
            msg = "time_limit is required when v_x is 0"
            raise ValueError(msg)
        return self

    @property
    def distance(self) -> float:
        """Straight-line start to goal distance."""
        return float(np.linalg.norm(np.subtract(self.goal, self.start)))

    @property
    def effective_time_limit(self) -> float:
        """Return the configured time limit or its default."""
        if self.time_limit is not None:
            return self.time_limit
        return TIME_LIMIT_FACTOR * self.distance / self.planner.v_x

    def build_world(self) -> World:
        """Build the world, keeping the spawn radius clear around both endpoints."""
        return self.world.build(keep_clear=(self.start, self.goal))

    def with_seed(self, seed: int) -> "TrialConfig":
        """Reseed the trial noise and, for a generated forest, the world."""
        update: dict[str, Any] = {"seed": seed}
        if self.world.forest is not None:
            update["world"] = self.world.model_copy(update={"seed": seed})
        return self.model_copy(update=update)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form."""
        data = self.model_dump(mode="json", by_alias=True)
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def parse_config_text(text: str, suffix: str, source: str = "<config>") -> dict[str, Any]:
    """Parse TOML or JSON config text by file suffix."""
    try:
        match suffix.lower():
            case ".toml":
                return tomllib.loads(text)
            case ".json":
                return json.loads(text)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        msg = f"Failed to parse {source}: {e}"
        raise ConfigError(msg) from e
    msg = f"Unsupported config format {suffix!r} for {source}, expected .toml or .json"
    raise ConfigError(msg)


def load_config(path: Path, overrides: dict[str, Any] | None = None) -> TrialConfig:
    """
    Load and validate a trial config file.

    Raises:
        ConfigError: if the file cannot be parsed or fails validation.
        ReportError: if the file cannot be read.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        msg = f"Failed to read config file {path}: {e}"
        raise ReportError(msg) from e
    data = parse_config_text(text, path.suffix, str(path))
    if overrides:
        data = {**data, **overrides}
    try:
        cfg = TrialConfig.model_validate(data)
    except ValidationError as e:
        msg = f"Invalid config {path}: {e}"
        raise ConfigError(msg) from e
    _LOGGER.debug("Loaded config %s (hash %s)", path, cfg.config_hash()[:12])
    return cfg
