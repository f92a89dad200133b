"""Synthetic worlds, depth rendering and ideal-tracking simulation."""

from .render import render_depth, render_raster
from .scenarios import forest_endpoints, gen_dead_end, gen_enclosure
from .state import SimState, sim_step
from .world import (
    Box,
    Cylinder,
    World,
    clearance,
    clearance_many,
    gen_forest,
    gt_collides,
    load_world,
    save_world,
)

__all__ = [
    "Box",
    "Cylinder",
    "SimState",
    "World",
    "clearance",
    "clearance_many",
    "forest_endpoints",
    "gen_dead_end",
    "gen_enclosure",
    "gen_forest",
    "gt_collides",
    "load_world",
    "render_depth",
    "render_raster",
    "save_world",
    "sim_step",
]
