"""Overlay rendering: grids, plans and trajectories composited into one PPM.

The output is a top-down map view with +x right and +y up (grid row v is
flipped into image row H-1-v). Colors are fixed constants so the same log
always produces byte-identical bytes, which the golden tests rely on.
"""

import numpy as np

from .errors import InvalidInput
from .image_io import write_ppm
from .occupancy_grid import OCCUPIED, GridConfig, OccupancyGrid, world_to_pixel_array

BACKGROUND = (245, 245, 245)
OBSTACLE = (40, 40, 40)
SEMANTIC_CELL = (220, 50, 47)
INFLATED_RING = (205, 205, 205)
PATH = (0, 160, 70)
WAYPOINT = (30, 90, 220)
TRAJECTORY = (130, 60, 180)
START = (0, 175, 175)
GOAL = (235, 140, 0)


def _paint_cells(img, u, v, color):
    img[v, u] = color


def _paint_disc(img, cu, cv, radius, color):
    h, w = img.shape[:2]
    lo_u, hi_u = max(0, cu - radius), min(w - 1, cu + radius)
    lo_v, hi_v = max(0, cv - radius), min(h - 1, cv + radius)
    if lo_u > hi_u or lo_v > hi_v:
        return
    uu, vv = np.meshgrid(
        np.arange(lo_u, hi_u + 1), np.arange(lo_v, hi_v + 1)
    )
    sel = (uu - cu) ** 2 + (vv - cv) ** 2 <= radius * radius
    img[vv[sel], uu[sel]] = color


def _paint_polyline(img, us, vs, color):
    h, w = img.shape[:2]
    for k in range(len(us) - 1):
        du = us[k + 1] - us[k]
        dv = vs[k + 1] - vs[k]
        steps = int(max(abs(du), abs(dv))) + 1
        uu = np.rint(np.linspace(us[k], us[k + 1], steps + 1)).astype(np.int64)
        vv = np.rint(np.linspace(vs[k], vs[k + 1], steps + 1)).astype(np.int64)
        ok = (uu >= 0) & (uu < w) & (vv >= 0) & (vv < h)
        img[vv[ok], uu[ok]] = color


def _to_cells(points_xy, cfg: GridConfig):
    pts = np.asarray(points_xy, dtype=np.float64)
    if pts.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    u, v, ok = world_to_pixel_array(pts[:, :2], cfg)
    return u[ok], v[ok]


def render_overlay(
    raw: OccupancyGrid,
    semantic: OccupancyGrid | None = None,
    inflated: OccupancyGrid | None = None,
    plan=None,
    trajectory_xy=None,
    start_xy=None,
    goals_xy=(),
) -> np.ndarray:
    """Compose one top-down RGB view; returns (H, W, 3) uint8."""
    cfg = raw.config
    img = np.empty((cfg.height, cfg.width, 3), dtype=np.uint8)
    img[:] = BACKGROUND

    if inflated is not None:
        if inflated.config != cfg:
            raise InvalidInput("inflated grid dimensions differ from raw grid")
        ring = (inflated.cells == OCCUPIED) & (raw.cells != OCCUPIED)
        img[ring] = INFLATED_RING
    img[raw.cells == OCCUPIED] = OBSTACLE
    if semantic is not None:
        if semantic.config != cfg:
            raise InvalidInput("semantic grid dimensions differ from raw grid")
        img[semantic.cells == OCCUPIED] = SEMANTIC_CELL

    if plan is not None and len(plan.path.cells) > 0:
        cells = np.asarray(plan.path.cells, dtype=np.int64)
        _paint_cells(img, cells[:, 0], cells[:, 1], PATH)
        wu, wv = _to_cells(plan.waypoints.points, cfg)
        for u, v in zip(wu, wv):
            _paint_disc(img, int(u), int(v), 2, WAYPOINT)

    if trajectory_xy is not None and len(trajectory_xy) > 0:
        tu, tv = _to_cells(trajectory_xy, cfg)
        _paint_polyline(img, tu, tv, TRAJECTORY)

    for gx, gy in goals_xy:
        gu, gv, ok = world_to_pixel_array(np.array([[gx, gy]]), cfg)
        if ok[0]:
            _paint_disc(img, int(gu[0]), int(gv[0]), 4, GOAL)
    if start_xy is not None:
        su, sv, ok = world_to_pixel_array(np.array([start_xy[:2]]), cfg)
        if ok[0]:
            _paint_disc(img, int(su[0]), int(sv[0]), 4, START)

    return img[::-1].copy()


def save_overlay(path, img: np.ndarray) -> None:
    write_ppm(path, img)


def _footprint_cells(shape, cfg: GridConfig):
    """Grid cells whose centers fall inside a Disc or Polygon footprint."""
    from .geometry import points_in_polygon
    from .simulator.world import Disc

    from .geometry import floor_index

    if isinstance(shape, Disc):
        xmin, xmax = shape.cx - shape.radius, shape.cx + shape.radius
        ymin, ymax = shape.cy - shape.radius, shape.cy + shape.radius
    else:
        vs = np.asarray(shape.vertices)
        xmin, ymin = vs.min(axis=0)
        xmax, ymax = vs.max(axis=0)
    res = cfg.resolution
    half_w, half_h = cfg.width // 2, cfg.height // 2
    us = np.arange(
        max(0, floor_index(xmin, res) + half_w),
        min(cfg.width - 1, floor_index(xmax, res) + half_w) + 1,
    )
    vs_idx = np.arange(
        max(0, floor_index(ymin, res) + half_h),
        min(cfg.height - 1, floor_index(ymax, res) + half_h) + 1,
    )
    if us.size == 0 or vs_idx.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    uu, vv = np.meshgrid(us, vs_idx)
    uu, vv = uu.ravel(), vv.ravel()
    centers = np.column_stack(
        [(uu - half_w + 0.5) * res, (vv - half_h + 0.5) * res]
    )
    if isinstance(shape, Disc):
        inside = (centers[:, 0] - shape.cx) ** 2 + (
            centers[:, 1] - shape.cy
        ) ** 2 <= shape.radius**2
    else:
        inside = points_in_polygon(centers, shape.vertices)
    return uu[inside], vv[inside]


def render_world(world, cfg: GridConfig, trajectory_xy=None, start_xy=None, goals_xy=()):
    """Ground-truth top-down view straight from entity geometry.

    Unlike render_overlay this does not involve any sensing; it shows what
    the world actually contains, which makes it the reference picture to
    hold explored maps against.
    """
    from .simulator.world import Category

    img = np.empty((cfg.height, cfg.width, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    order = {Category.ZONE: 0, Category.ITEM: 1, Category.STATIC: 2}
    for e in sorted(world.entities, key=lambda e: order[e.category]):
        u, v = _footprint_cells(e.shape, cfg)
        img[v, u] = e.color
    for a in world.agents:
        ax, ay = a.position()
        au, av, ok = world_to_pixel_array(np.array([[ax, ay]]), cfg)
        if ok[0]:
            r = max(1, int(round(a.radius / cfg.resolution)))
            _paint_disc(img, int(au[0]), int(av[0]), r, a.color)
    if trajectory_xy is not None and len(trajectory_xy) > 0:
        tu, tv = _to_cells(trajectory_xy, cfg)
        _paint_polyline(img, tu, tv, TRAJECTORY)
    for gx, gy in goals_xy:
        gu, gv, ok = world_to_pixel_array(np.array([[gx, gy]]), cfg)
        if ok[0]:
            _paint_disc(img, int(gu[0]), int(gv[0]), 4, GOAL)
    if start_xy is not None:
        su, sv, ok = world_to_pixel_array(np.array([start_xy[:2]]), cfg)
        if ok[0]:
            _paint_disc(img, int(su[0]), int(sv[0]), 4, START)
    return img[::-1].copy()
