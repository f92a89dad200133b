"""Scripted scenario worlds and batch endpoints."""

from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray

from ..const import DEFAULT_FLIGHT_ALTITUDE, FOREST_ENDPOINTS, FOREST_LENGTH
from .world import Box, World

Endpoints = tuple[NDArray[np.float64], NDArray[np.float64]]

DEAD_END_CEILING = 3.0
WALL_THICKNESS = 0.2


def forest_endpoints(
    count: int = FOREST_ENDPOINTS,
    separation: float = FOREST_LENGTH,
    span: float = 30.0,
    altitude: float = DEFAULT_FLIGHT_ALTITUDE,
) -> list[Endpoints]:
    """Start/goal pairs `separation` apart along x, evenly spaced in y over [-span/2, span/2]."""
    ys = np.linspace(-span / 2.0, span / 2.0, count) if count > 1 else np.zeros(1)
    return [
        (np.array([0.0, float(y), altitude]), np.array([separation, float(y), altitude])) for y in ys
    ]


def gen_dead_end(
    seed: int | Sequence[int],
    width_range: tuple[float, float] = (3.0, 5.0),
    depth_range: tuple[float, float] = (6.0, 10.0),
    altitude: float = DEFAULT_FLIGHT_ALTITUDE,
) -> tuple[World, NDArray[np.float64], NDArray[np.float64]]:
    """
    U-shaped trap closed by ground and ceiling, open only behind the start.

    The goal sits beyond the back wall, so the cheapest primitives lead into
    the trap. Returns (world, start, goal).
    """
    rng = np.random.default_rng(seed)
    half_width = rng.uniform(*width_range) / 2.0
    depth = rng.uniform(*depth_range)
    back = 2.0
    t = WALL_THICKNESS
    ceiling = DEAD_END_CEILING
    boxes = (
        Box(lower=(-back, half_width, 0.0), upper=(depth, half_width + t, ceiling)),
        Box(lower=(-back, -half_width - t, 0.0), upper=(depth, -half_width, ceiling)),
        Box(lower=(depth, -half_width - t, 0.0), upper=(depth + t, half_width + t, ceiling)),
    )
    margin = 5.0
    bounds = Box(
        lower=(-back - margin, -half_width - t - margin, 0.0),
        upper=(depth + t + 2 * margin, half_width + t + margin, ceiling),
    )
    world = World(bounds=bounds, boxes=boxes, ground_z=0.0, ceiling_z=ceiling)
    start = np.array([0.0, 0.0, altitude])
    goal = np.array([depth + t + margin, 0.0, altitude])
    return world, start, goal


def gen_enclosure(
    center: Sequence[float], half_extent: float = 2.0, thickness: float = WALL_THICKNESS
) -> World:
    """Closed hollow box around center."""
    c = np.asarray(center, dtype=np.float64)
    inner_lo, inner_hi = c - half_extent, c + half_extent
    outer_lo, outer_hi = inner_lo - thickness, inner_hi + thickness
    boxes = []
    for axis in range(3):
        for lo, hi in ((outer_lo[axis], inner_lo[axis]), (inner_hi[axis], outer_hi[axis])):
            lower, upper = outer_lo.copy(), outer_hi.copy()
            lower[axis], upper[axis] = lo, hi
            boxes.append(Box(lower=tuple(lower.tolist()), upper=tuple(upper.tolist())))
    bounds = Box(lower=tuple((outer_lo - 1.0).tolist()), upper=tuple((outer_hi + 1.0).tolist()))
    return World(bounds=bounds, boxes=tuple(boxes))
