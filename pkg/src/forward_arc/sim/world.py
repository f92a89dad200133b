"""Ground-truth worlds: obstacle models, forest generation, clearance and world files."""

from collections.abc import Sequence
import logging
import math
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    ValidationError,
    field_validator,
    model_validator,
)

from ..const import (
    DEFAULT_MIN_SEPARATION,
    DEFAULT_OBSTACLE_DIAMETER,
    DEFAULT_OBSTACLE_HEIGHT,
    DEFAULT_SPAWN_RADIUS,
    FOREST_LENGTH,
    FOREST_WIDTH,
    PACKING_WARN_RATIO,
    WORLD_FILE_VERSION,
)
from ..planning.errors import ConfigError, InvalidArgumentError, ReportError

_LOGGER = logging.getLogger(__name__)

Vec3 = tuple[float, float, float]

# candidates tried around each active sample before it is retired
POISSON_ATTEMPTS = 30
BOUNDS_TOLERANCE = 1e-9


class Cylinder(BaseModel):
    """Vertical solid cylinder."""

    model_config = ConfigDict(frozen=True)

    center_xy: tuple[float, float]
    radius: float = Field(gt=0)
    z_range: tuple[float, float]

    @field_validator("z_range")
    @classmethod
    def check_z_range(cls, value: tuple[float, float]) -> tuple[float, float]:
        """Ensure the z interval is non-degenerate."""
        if not value[0] < value[1]:
            msg = f"z_range must be increasing, got {value}"
            raise ValueError(msg)
        return value


class Box(BaseModel):
    """Axis-aligned solid box."""

    model_config = ConfigDict(frozen=True)

    lower: Vec3
    upper: Vec3

    @model_validator(mode="after")
    def check_extent(self) -> "Box":
        """Ensure the box is non-degenerate."""
        if not all(lo < hi for lo, hi in zip(self.lower, self.upper, strict=True)):
            msg = f"box lower {self.lower} must be below upper {self.upper} on every axis"
            raise ValueError(msg)
        return self

    def contains_box(self, other: "Box", tolerance: float = BOUNDS_TOLERANCE) -> bool:
        """Whether other lies inside this box."""
        return all(a - tolerance <= b for a, b in zip(self.lower, other.lower, strict=True)) and all(
            b <= a + tolerance for a, b in zip(self.upper, other.upper, strict=True)
        )

    def contains_point(self, point: ArrayLike, tolerance: float = BOUNDS_TOLERANCE) -> bool:
        """Whether a point lies inside this box."""
        p = np.asarray(point, dtype=np.float64)
        above = np.all(p >= np.array(self.lower) - tolerance)
        return bool(above and np.all(p <= np.array(self.upper) + tolerance))


class World(BaseModel):
    """Immutable obstacle world, stored as a versioned JSON document."""

    model_config = ConfigDict(frozen=True)

    version: int = WORLD_FILE_VERSION
    bounds: Box
    cylinders: tuple[Cylinder, ...] = ()
    boxes: tuple[Box, ...] = ()
    ground_z: float | None = None
    ceiling_z: float | None = None
    requested_density: float | None = None
    realized_density: float | None = None

    _centers: NDArray[np.float64] = PrivateAttr()
    _radii: NDArray[np.float64] = PrivateAttr()
    _z_lo: NDArray[np.float64] = PrivateAttr()
    _z_hi: NDArray[np.float64] = PrivateAttr()
    _box_lower: NDArray[np.float64] = PrivateAttr()
    _box_upper: NDArray[np.float64] = PrivateAttr()

    @field_validator("version")
    @classmethod
    def check_version(cls, value: int) -> int:
        """Reject world files from other format versions."""
        if value != WORLD_FILE_VERSION:
            msg = f"unsupported world file version {value}, expected {WORLD_FILE_VERSION}"
            raise ValueError(msg)
        return value

    @model_validator(mode="after")
    def check_bounds(self) -> "World":
        """Ensure the bounds contain every obstacle and the planes are ordered."""
        for cyl in self.cylinders:
            (x, y), r = cyl.center_xy, cyl.radius
            extent = Box(lower=(x - r, y - r, cyl.z_range[0]), upper=(x + r, y + r, cyl.z_range[1]))
            if not self.bounds.contains_box(extent):
                msg = f"cylinder at {cyl.center_xy} leaves the world bounds"
                raise ValueError(msg)
        for box in self.boxes:
            if not self.bounds.contains_box(box):
                msg = f"box {box.lower}..{box.upper} leaves the world bounds"
                raise ValueError(msg)
        if self.ground_z is not None and self.ceiling_z is not None and not self.ground_z < self.ceiling_z:
            msg = f"ground_z ({self.ground_z}) must be below ceiling_z ({self.ceiling_z})"
            raise ValueError(msg)
        return self

    def model_post_init(self, context: object, /) -> None:
        """Cache obstacle arrays for vectorized queries."""
        self._centers = np.array([c.center_xy for c in self.cylinders], dtype=np.float64).reshape(-1, 2)
        self._radii = np.array([c.radius for c in self.cylinders], dtype=np.float64)
        self._z_lo = np.array([c.z_range[0] for c in self.cylinders], dtype=np.float64)
        self._z_hi = np.array([c.z_range[1] for c in self.cylinders], dtype=np.float64)
        self._box_lower = np.array([b.lower for b in self.boxes], dtype=np.float64).reshape(-1, 3)
        self._box_upper = np.array([b.upper for b in self.boxes], dtype=np.float64).reshape(-1, 3)

    @property
    def cylinder_arrays(self) -> tuple[NDArray[np.float64], ...]:
        """Return (centers (N, 2), radii, z_lo, z_hi)."""
        return self._centers, self._radii, self._z_lo, self._z_hi

    @property
    def box_arrays(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Return (lower (M, 3), upper (M, 3))."""
        return self._box_lower, self._box_upper


def clearance_many(world: World, points: ArrayLike) -> NDArray[np.float64]:
    """Distance from each (N, 3) point to the nearest obstacle or plane surface, 0 inside."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    best = np.full(len(pts), np.inf)
    centers, radii, z_lo, z_hi = world.cylinder_arrays
    if len(radii):
        radial = np.linalg.norm(pts[:, None, :2] - centers[None, :, :], axis=2) - radii[None, :]
        axial = np.maximum(z_lo[None, :] - pts[:, None, 2], pts[:, None, 2] - z_hi[None, :])
        dist = np.hypot(np.maximum(radial, 0.0), np.maximum(axial, 0.0))
        best = np.minimum(best, dist.min(axis=1))
    lower, upper = world.box_arrays
    if len(lower):
        below = lower[None, :, :] - pts[:, None, :]
        gap = np.maximum(np.maximum(below, pts[:, None, :] - upper[None, :, :]), 0.0)
        best = np.minimum(best, np.linalg.norm(gap, axis=2).min(axis=1))
    if world.ground_z is not None:
        best = np.minimum(best, np.maximum(pts[:, 2] - world.ground_z, 0.0))
    if world.ceiling_z is not None:
        best = np.minimum(best, np.maximum(world.ceiling_z - pts[:, 2], 0.0))
    return best


def clearance(world: World, position: ArrayLike) -> float:
    """Distance from a point to the nearest surface of the world, 0 inside an obstacle."""
    return float(clearance_many(world, np.asarray(position, dtype=np.float64)[None, :])[0])


def gt_collides(world: World, position: ArrayLike, robot_radius: float) -> bool:
    """Whether a sphere of robot_radius at position strictly intersects the world."""
    if robot_radius <= 0:
        msg = f"robot_radius must be positive, got {robot_radius}"
        raise InvalidArgumentError(msg)
    return clearance(world, position) < robot_radius


def poisson_disk(
    region: tuple[float, float, float, float],
    min_separation: float,
    rng: np.random.Generator,
    attempts: int = POISSON_ATTEMPTS,
) -> NDArray[np.float64]:
    """
    Maximal Poisson-disk sample of a rectangle (x0, x1, y0, y1).

    Bridson's method: grow from a random seed point, trying `attempts`
    candidates in the annulus [r, 2r) around each active sample, on a
    background grid of cell size r / sqrt(2) holding at most one sample.
    """
    x0, x1, y0, y1 = region
    r = min_separation
    cell = r / math.sqrt(2.0)
    cols = max(1, math.ceil((x1 - x0) / cell))
    rows = max(1, math.ceil((y1 - y0) / cell))
    grid = np.full((cols, rows), -1, dtype=np.int64)
    samples: list[NDArray[np.float64]] = []

    def cell_of(p: NDArray[np.float64]) -> tuple[int, int]:
        return min(int((p[0] - x0) / cell), cols - 1), min(int((p[1] - y0) / cell), rows - 1)

    def fits(p: NDArray[np.float64]) -> bool:
        if not (x0 <= p[0] <= x1 and y0 <= p[1] <= y1):
            return False
        ci, cj = cell_of(p)
        near = grid[max(ci - 2, 0) : ci + 3, max(cj - 2, 0) : cj + 3]
        for index in near[near >= 0]:
            if np.sum((samples[index] - p) ** 2) < r * r:
                return False
        return True

    def add(p: NDArray[np.float64]) -> None:
        grid[cell_of(p)] = len(samples)
        samples.append(p)
        active.append(len(samples) - 1)

    active: list[int] = []
    add(np.array([rng.uniform(x0, x1), rng.uniform(y0, y1)]))
    while active:
        slot = int(rng.integers(len(active)))
        origin = samples[active[slot]]
        radius = np.sqrt(rng.uniform(r * r, 4.0 * r * r, attempts))
        angle = rng.uniform(0.0, 2.0 * math.pi, attempts)
        candidates = origin + np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
        for candidate in candidates:
            if fits(candidate):
                add(candidate)
                break
        else:
            active[slot] = active[-1]
            active.pop()
    return np.array(samples).reshape(-1, 2)


def forest_region() -> tuple[float, float, float, float]:
    """Return the default forest rectangle (x0, x1, y0, y1)."""
    return (0.0, FOREST_LENGTH, -FOREST_WIDTH / 2.0, FOREST_WIDTH / 2.0)


def gen_forest(
    density: float,
    region: tuple[float, float, float, float] | None = None,
    diameter: float = DEFAULT_OBSTACLE_DIAMETER,
    min_separation: float = DEFAULT_MIN_SEPARATION,
    seed: int | Sequence[int] = 0,
    keep_clear: Sequence[ArrayLike] = (),
    spawn_radius: float = DEFAULT_SPAWN_RADIUS,
    height: float = DEFAULT_OBSTACLE_HEIGHT,
    ground_z: float | None = 0.0,
) -> World:
    """
    Generate a forest of vertical cylinders with uniform density.

    Centers come from a maximal Poisson-disk sample in a deterministic random
    order, minus those within spawn_radius (surface distance) of a keep_clear
    point; the first ceil(density * area) are kept. A packing that cannot reach
    the target is returned as is with its realized density.
    """
    if density < 0:
        msg = f"density must be non-negative, got {density}"
        raise InvalidArgumentError(msg)
    if min_separation < diameter:
        msg = f"min_separation ({min_separation}) must be at least the diameter ({diameter})"
        raise InvalidArgumentError(msg)
    region = forest_region() if region is None else region
    x0, x1, y0, y1 = region
    area = (x1 - x0) * (y1 - y0)
    target = math.ceil(density * area - 1e-9)
    radius = diameter / 2.0
    rng = np.random.default_rng(seed)

    centers = np.empty((0, 2))
    if target > 0:
        centers = poisson_disk(region, min_separation, rng)
        for point in keep_clear:
            p = np.asarray(point, dtype=np.float64)[:2]
            centers = centers[np.linalg.norm(centers - p, axis=1) >= spawn_radius + radius]
        centers = centers[rng.permutation(len(centers))][:target]

    realized = len(centers) / area if area > 0 else 0.0
    if target > 0 and realized < PACKING_WARN_RATIO * density:
        _LOGGER.warning(
            "Poisson packing capped at %d of %d obstacles (realized density %.4f, requested %.4f)",
            len(centers),
            target,
            realized,
            density,
        )
    margin = spawn_radius + radius
    bounds = Box(
        lower=(x0 - margin, y0 - margin, 0.0 if ground_z is None else min(ground_z, 0.0)),
        upper=(x1 + margin, y1 + margin, height),
    )
    cylinders = tuple(
        Cylinder(center_xy=(float(x), float(y)), radius=radius, z_range=(0.0, height)) for x, y in centers
    )
    _LOGGER.debug("Generated forest with %d cylinders (seed %s)", len(cylinders), seed)
    return World(
        bounds=bounds,
        cylinders=cylinders,
        ground_z=ground_z,
        requested_density=density,
        realized_density=realized,
    )


def save_world(world: World, path: Path) -> None:
    """Write a world file."""
    try:
        Path(path).write_text(world.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        msg = f"Failed to write world file {path}: {e}"
        raise ReportError(msg) from e


def load_world(path: Path) -> World:
    """Read and validate a world file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        msg = f"Failed to read world file {path}: {e}"
        raise ReportError(msg) from e
    try:
        return World.model_validate_json(text)
    except ValidationError as e:
        msg = f"Invalid world file {path}: {e}"
        raise ConfigError(msg) from e
