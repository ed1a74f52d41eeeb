"""Ego-centered bird-eye raster of the world.

Squares grid, heading-up: smaller row index means further ahead.  Static
context (road band), agent boxes, roadside objects, and light markers are
merged by per-pixel max, so all values stay in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cimlab.simworld.world import WorldState

ROAD_VAL = 0.5
CAR_VAL = 1.0
EGO_VAL = 0.75
NUISANCE_VAL = 0.25
RED_VAL = 1.0
GREEN_VAL = 0.4

# pixel offsets per nuisance style, relative to the object's anchor cell
_STYLE_PATTERNS: dict[int, tuple[tuple[int, int], ...]] = {
    0: ((0, 0), (0, 1), (1, 0), (1, 1)),
    1: ((-1, 0), (0, 0), (1, 0)),
    2: ((0, -1), (0, 0), (0, 1)),
    3: ((0, 0), (1, 0), (1, 1)),
    4: ((-1, -1), (0, 0), (1, 1)),
}


@dataclass(frozen=True)
class RenderConfig:
    grid_side: int = 32
    window_m: float = 32.0
    road_half_width: float = 3.0

    def __post_init__(self) -> None:
        if self.grid_side < 8:
            raise ValueError("grid_side must be >= 8")
        if self.window_m <= 0 or self.road_half_width <= 0:
            raise ValueError("window and road width must be > 0")

    @property
    def ppm(self) -> float:
        return self.grid_side / self.window_m

    @property
    def ego_row(self) -> int:
        return self.grid_side // 2


def _round(x: float) -> int:
    return int(np.floor(x + 0.5))


def _lateral_offset(town, s: float) -> float:
    """Integrated curvature drift at arc length s (render-only geometry)."""
    profile = town.curvature_profile
    if not profile:
        return 0.0
    seg = town.route_length / len(profile)
    s = min(max(s, 0.0), town.route_length)
    j = min(int(s // seg), len(profile) - 1)
    return sum(profile[i] for i in range(j)) * seg + profile[j] * (s - j * seg)


def _paint(grid: np.ndarray, r0: int, r1: int, c0: int, c1: int, val: float) -> None:
    g = grid.shape[0]
    r0, r1 = max(0, min(r0, r1)), min(g - 1, max(r0, r1))
    c0, c1 = max(0, min(c0, c1)), min(g - 1, max(c0, c1))
    if r0 > r1 or c0 > c1:
        return
    region = grid[r0 : r1 + 1, c0 : c1 + 1]
    np.maximum(region, val, out=region)


def render(world: WorldState, cfg: RenderConfig = RenderConfig()) -> np.ndarray:
    """Pure function of the world state; returns a (grid, grid) float64 array."""
    g = cfg.grid_side
    ppm = cfg.ppm
    town = world.task.town
    ego_row = cfg.ego_row
    grid = np.zeros((g, g))

    def row_of(s: float) -> int:
        return ego_row - _round((s - world.ego_pos) * ppm)

    lat0 = _lateral_offset(town, world.ego_pos)
    centers = np.empty(g, dtype=int)
    for r in range(g):
        s_row = world.ego_pos + (ego_row - r) / ppm
        shift = (_lateral_offset(town, s_row) - lat0) * ppm
        centers[r] = g // 2 + _round(shift)

    half_px = max(1, _round(cfg.road_half_width * ppm))
    for r in range(g):
        _paint(grid, r, r, centers[r] - half_px, centers[r] + half_px, ROAD_VAL)

    def center_col(r: int) -> int:
        return int(centers[min(max(r, 0), g - 1)])

    for i in range(world.nuisances.count):
        s = float(world.nuisances.position[i])
        r = row_of(s)
        if not -2 <= r <= g + 1:
            continue
        c = center_col(r) + int(world.nuisances.side[i]) * _round((cfg.road_half_width + 2) * ppm)
        for dr, dc in _STYLE_PATTERNS.get(int(world.nuisances.style[i]) % 5, _STYLE_PATTERNS[0]):
            _paint(grid, r + dr, r + dr, c + dc, c + dc, NUISANCE_VAL)

    for i, s in enumerate(town.light_positions):
        r = row_of(float(s))
        if not 0 <= r < g:
            continue
        c = center_col(r) + _round((cfg.road_half_width + 1) * ppm)
        val = RED_VAL if world.light_colors[i] == "red" else GREEN_VAL
        _paint(grid, r, r, c, c, val)

    def paint_car(front: float, length: float, val: float) -> None:
        r_front = row_of(front)
        r_rear = row_of(front - length)
        if r_rear < 0 or r_front > g - 1:
            return
        c = center_col((r_front + r_rear) // 2)
        _paint(grid, r_front, r_rear, c - 1, c + 1, val)

    paint_car(world.ego_pos, world.physics.car_length, EGO_VAL)
    for i in range(world.cars.count):
        paint_car(float(world.cars.position[i]), float(world.cars.length[i]), CAR_VAL)

    return grid


def road_mask(cfg: RenderConfig = RenderConfig()) -> np.ndarray:
    """Boolean mask of the on-road agent region ahead of the ego."""
    g = cfg.grid_side
    half_px = max(1, _round(cfg.road_half_width * cfg.ppm)) + 1
    mask = np.zeros((g, g), dtype=bool)
    lo = max(0, g // 2 - half_px)
    hi = min(g - 1, g // 2 + half_px)
    mask[: cfg.ego_row, lo : hi + 1] = True
    return mask
