"""Depth rendering by analytic ray casting against a World."""

import logging
import math

import numpy as np
from numpy.typing import NDArray

from ..planning.camera import CameraModel, NoReturnPolicy
from ..planning.geometry import RigidTransform
from ..planning.memory import DepthFrame
from .world import World

_LOGGER = logging.getLogger(__name__)


def _first_positive(t_near: NDArray[np.float64], t_far: NDArray[np.float64]) -> NDArray[np.float64]:
    """Entry parameter of an interval hit, inf when the interval is behind the origin or empty."""
    return np.where((t_near > 0) & (t_near <= t_far), t_near, np.inf)


def _hit_cylinder(
    origin: NDArray[np.float64],
    dirs: NDArray[np.float64],
    center: NDArray[np.float64],
    radius: float,
    z_lo: float,
    z_hi: float,
) -> NDArray[np.float64]:
    """Ray parameter of the first hit with a capped vertical cylinder."""
    rel = origin[:2] - center
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    a = dx * dx + dy * dy
    b = 2.0 * (dx * rel[0] + dy * rel[1])
    c = rel @ rel - radius * radius
    hits = np.full(len(dirs), np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = b * b - 4.0 * a * c
        side = (-b - np.sqrt(disc)) / (2.0 * a)
        z_side = origin[2] + side * dz
        ok = (disc >= 0) & (a > 0) & (side > 0) & (z_side >= z_lo) & (z_side <= z_hi)
        hits = np.where(ok, side, hits)
        for z_cap in (z_lo, z_hi):
            t_cap = (z_cap - origin[2]) / dz
            px = rel[0] + t_cap * dx
            py = rel[1] + t_cap * dy
            ok = (t_cap > 0) & (px * px + py * py <= radius * radius)
            hits = np.where(ok & (t_cap < hits), t_cap, hits)
    return hits


def _hit_box(
    origin: NDArray[np.float64],
    dirs: NDArray[np.float64],
    lower: NDArray[np.float64],
    upper: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Ray parameter of the first hit with an axis-aligned box (slab method)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t_a = (lower - origin) / dirs
        t_b = (upper - origin) / dirs
    t_near = np.nanmax(np.minimum(t_a, t_b), axis=1)
    t_far = np.nanmin(np.maximum(t_a, t_b), axis=1)
    return _first_positive(t_near, t_far)


def _hit_plane(origin: NDArray[np.float64], dirs: NDArray[np.float64], z_plane: float) -> NDArray[np.float64]:
    """Ray parameter of the hit with a horizontal plane."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (z_plane - origin[2]) / dirs[:, 2]
    return np.where(t > 0, t, np.inf)


def render_raster(
    world: World,
    sensor_pose: RigidTransform,
    camera: CameraModel,
    rng: np.random.Generator | None = None,
) -> NDArray[np.float32]:
    """
    Render a depth raster seen from sensor_pose (sensor-to-world).

    Rays are scaled to unit sensor z, so the nearest hit parameter is the
    pixel depth. Hits closer than d_min are NaN; pixels with no hit within
    d_max follow the camera's no-return policy.
    """
    sensor_pose.ensure_proper("sensor pose")
    origin = sensor_pose.translation
    rays_S = camera.pixel_rays().reshape(-1, 3)
    dirs = rays_S @ sensor_pose.rotation.T
    depth = np.full(len(dirs), np.inf)

    # farthest point any in-range pixel can reach
    reach = camera.d_max * float(np.max(np.linalg.norm(rays_S, axis=1)))
    forward = sensor_pose.rotation[:, 2]
    centers, radii, z_lo, z_hi = world.cylinder_arrays
    culled = 0
    for center, radius, lo, hi in zip(centers, radii, z_lo, z_hi, strict=True):
        horizontal = max(float(np.linalg.norm(origin[:2] - center)) - radius, 0.0)
        vertical = max(lo - origin[2], origin[2] - hi, 0.0)
        ends = np.array([[center[0], center[1], lo], [center[0], center[1], hi]])
        ahead = float(np.max((ends - origin) @ forward)) + radius
        if math.hypot(horizontal, vertical) > reach or ahead < camera.d_min:
            culled += 1
            continue
        depth = np.minimum(depth, _hit_cylinder(origin, dirs, center, radius, lo, hi))
    lower, upper = world.box_arrays
    for box_lower, box_upper in zip(lower, upper, strict=True):
        depth = np.minimum(depth, _hit_box(origin, dirs, box_lower, box_upper))
    for plane in (world.ground_z, world.ceiling_z):
        if plane is not None:
            depth = np.minimum(depth, _hit_plane(origin, dirs, plane))
    _LOGGER.debug("Rendered %d cylinders, culled %d", len(radii) - culled, culled)

    no_return = np.inf if camera.no_return is NoReturnPolicy.FREE else np.nan
    hit = np.isfinite(depth) & (depth <= camera.d_max)
    if camera.noise_std > 0 and np.any(hit):
        rng = np.random.default_rng() if rng is None else rng
        depth[hit] = depth[hit] + rng.normal(0.0, camera.noise_std, int(np.count_nonzero(hit)))
    raster = np.where(hit, depth, no_return)
    raster = np.where(hit & (depth < camera.d_min), np.nan, raster)
    return raster.reshape(camera.height, camera.width).astype(np.float32)


def render_depth(
    world: World,
    sensor_pose: RigidTransform,
    camera: CameraModel,
    stamp: float = 0.0,
    body_pose: RigidTransform | None = None,
    rng: np.random.Generator | None = None,
) -> DepthFrame:
    """Render a depth frame and build its point cloud."""
    raster = render_raster(world, sensor_pose, camera, rng)
    return DepthFrame.from_depth(raster, camera, stamp, pose=body_pose)
