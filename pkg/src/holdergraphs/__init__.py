"""Exact Hoelder-graph towers, removability criteria, and shear-map diagnostics."""

from .tower import (
    TowerParams,
    LevelGeometry,
    Rect,
    RectAddress,
    level_geometry,
    column_position,
    hat_weight,
    active_positions,
    locate,
    density,
    line_mass,
    line_mass_bruteforce,
    rects_on_line,
    graph_interval,
    graph_midpoint,
    solve_parameters,
    tent,
)

__all__ = [
    "TowerParams",
    "LevelGeometry",
    "Rect",
    "RectAddress",
    "level_geometry",
    "column_position",
    "hat_weight",
    "active_positions",
    "locate",
    "density",
    "line_mass",
    "line_mass_bruteforce",
    "rects_on_line",
    "graph_interval",
    "graph_midpoint",
    "solve_parameters",
    "tent",
]

__version__ = "0.1.0"
