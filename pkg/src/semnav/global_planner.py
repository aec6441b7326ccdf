"""Grid A* with octile heuristic, plus waypoint extraction from cell paths.

The planner is a pure function of (inflated grid snapshot, start, goal): it
keeps no state between calls, so every map update simply plans from scratch.
Tie-breaking is pinned down (equal f pops the larger g, then the smaller
(v, u)) to make paths reproducible byte for byte.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .errors import (
    ExpansionBudgetExceeded,
    GoalUnreachable,
    InvalidInput,
    NoPath,
)
from .global_map import Pose2D
from .occupancy_grid import GridConfig, OccupancyGrid, pixel_to_world, world_to_pixel

SQRT2 = math.sqrt(2.0)

# Orthogonal moves first, then diagonals. Order only affects heap insertion
# order, never the popped sequence (the comparator is a strict total order).
_DU = np.array([1, -1, 0, 0, 1, 1, -1, -1], dtype=np.int64)
_DV = np.array([0, 0, 1, -1, 1, -1, 1, -1], dtype=np.int64)


@dataclass(frozen=True)
class PlannerConfig:
    """Knobs for the search and for waypoint extraction.

    max_expansions and snap_radius default to grid-derived values
    (4 * width * height and twice the inflation radius) when left None.
    """

    theta_th: float = math.radians(10.0)
    heuristic_weight: float = 1.0
    max_expansions: int | None = None
    snap_radius: int | None = None
    waypoint_spacing: float = 2.0

    def __post_init__(self):
        if not (0 < self.theta_th < math.pi):
            raise InvalidInput("theta_th must be in (0, pi)")
        if self.heuristic_weight < 1.0:
            raise InvalidInput("heuristic_weight below 1 breaks admissibility")
        if self.waypoint_spacing <= 0:
            raise InvalidInput("waypoint_spacing must be positive")


@dataclass(frozen=True)
class CellPath:
    """Ordered (u, v) cells from start to goal, inclusive."""

    cells: tuple
    total_cost: float

    def __len__(self):
        return len(self.cells)


@dataclass(frozen=True)
class Waypoints:
    """World-coordinate waypoints; first is the start, last is the goal."""

    points: tuple

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class PlanResult:
    path: CellPath
    waypoints: Waypoints


def octile(du: int, dv: int) -> float:
    """Octile distance for |du|, |dv| cell offsets."""
    dx = abs(du)
    dy = abs(dv)
    return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)


@njit(cache=True)
def _astar_core(occ, su, sv, gu, gv, weight, budget):  # pragma: no cover
    h, w = occ.shape
    n = h * w
    gscore = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=np.uint8)

    cap = 1024
    hf = np.empty(cap, dtype=np.float64)
    hg = np.empty(cap, dtype=np.float64)
    hi = np.empty(cap, dtype=np.int64)
    size = 0

    du8 = _DU
    dv8 = _DV

    start = sv * w + su
    goal = gv * w + gu
    gscore[start] = 0.0
    dx = abs(su - gu)
    dy = abs(sv - gv)
    hmax = dx if dx > dy else dy
    hmin = dx if dx < dy else dy
    hf[0] = weight * ((hmax - hmin) + SQRT2 * hmin)
    hg[0] = 0.0
    hi[0] = start
    size = 1

    expansions = 0
    while size > 0:
        top_f = hf[0]
        top_g = hg[0]
        top_i = hi[0]
        # Pop: move the last element down from the root.
        size -= 1
        if size > 0:
            mf = hf[size]
            mg = hg[size]
            mi = hi[size]
            pos = 0
            while True:
                child = 2 * pos + 1
                if child >= size:
                    break
                right = child + 1
                if right < size:
                    cf = hf[child]
                    cg = hg[child]
                    ci = hi[child]
                    rf = hf[right]
                    rg = hg[right]
                    ri = hi[right]
                    if rf < cf or (rf == cf and (rg > cg or (rg == cg and ri < ci))):
                        child = right
                cf = hf[child]
                cg = hg[child]
                ci = hi[child]
                if cf < mf or (cf == mf and (cg > mg or (cg == mg and ci < mi))):
                    hf[pos] = cf
                    hg[pos] = cg
                    hi[pos] = ci
                    pos = child
                else:
                    break
            hf[pos] = mf
            hg[pos] = mg
            hi[pos] = mi

        if closed[top_i] == 1 or top_g != gscore[top_i]:
            continue
        closed[top_i] = 1
        if top_i == goal:
            return 0, parent, expansions
        expansions += 1
        if expansions > budget:
            return 2, parent, expansions

        cv = top_i // w
        cu = top_i - cv * w
        for k in range(8):
            du = du8[k]
            dv = dv8[k]
            nu = cu + du
            nv = cv + dv
            if nu < 0 or nu >= w or nv < 0 or nv >= h:
                continue
            if occ[nv, nu] != 0:
                continue
            diagonal = du != 0 and dv != 0
            if diagonal and occ[cv, nu] != 0 and occ[nv, cu] != 0:
                continue  # squeezing between two blocked orthogonals
            step = SQRT2 if diagonal else 1.0
            tentative = top_g + step
            ni = nv * w + nu
            if tentative < gscore[ni]:
                gscore[ni] = tentative
                parent[ni] = top_i
                ddx = abs(nu - gu)
                ddy = abs(nv - gv)
                hmax = ddx if ddx > ddy else ddy
                hmin = ddx if ddx < ddy else ddy
                fn = tentative + weight * ((hmax - hmin) + SQRT2 * hmin)
                if size >= hf.shape[0]:
                    ncap = hf.shape[0] * 2
                    tf = np.empty(ncap, dtype=np.float64)
                    tg = np.empty(ncap, dtype=np.float64)
                    ti = np.empty(ncap, dtype=np.int64)
                    tf[:size] = hf[:size]
                    tg[:size] = hg[:size]
                    ti[:size] = hi[:size]
                    hf = tf
                    hg = tg
                    hi = ti
                pos = size
                size += 1
                while pos > 0:
                    par = (pos - 1) // 2
                    pf = hf[par]
                    pg = hg[par]
                    pi = hi[par]
                    if fn < pf or (fn == pf and (tentative > pg or (tentative == pg and ni < pi))):
                        hf[pos] = pf
                        hg[pos] = pg
                        hi[pos] = pi
                        pos = par
                    else:
                        break
                hf[pos] = fn
                hg[pos] = tentative
                hi[pos] = ni
    return 1, parent, expansions


@lru_cache(maxsize=16)
def _snap_ring(radius: int):
    """Disc offsets sorted by (squared distance, dv, du), center excluded."""
    out = []
    for dv in range(-radius, radius + 1):
        for du in range(-radius, radius + 1):
            d2 = du * du + dv * dv
            if 0 < d2 <= radius * radius:
                out.append((d2, dv, du))
    out.sort()
    return tuple(out)


def _snap_to_free(occ: np.ndarray, u: int, v: int, radius: int, what: str):
    if occ[v, u] == 0:
        return u, v
    h, w = occ.shape
    for _, dv, du in _snap_ring(max(radius, 0)):
        nu, nv = u + du, v + dv
        if 0 <= nu < w and 0 <= nv < h and occ[nv, nu] == 0:
            return nu, nv
    raise GoalUnreachable(
        f"{what} cell ({u}, {v}) is occupied with no free cell within {radius}"
    )


def path_cost(cells) -> float:
    """Canonical path cost: straight steps + sqrt(2) * diagonal steps.

    Counting the two step kinds and forming the sum once keeps the value
    exactly reproducible regardless of the order costs were accumulated in.
    """
    straight = 0
    diagonal = 0
    for (u1, v1), (u2, v2) in zip(cells, cells[1:]):
        if u1 != u2 and v1 != v2:
            diagonal += 1
        else:
            straight += 1
    return straight + diagonal * SQRT2


def astar(
    grid: OccupancyGrid, start, goal, cfg: PlannerConfig = PlannerConfig()
) -> CellPath:
    """Minimum-cost 8-connected path between two cells on the inflated grid.

    Args:
        grid: occupancy grid (0 free, 255 occupied).
        start, goal: (u, v) cells. Occupied endpoints are snapped to the
            nearest free cell within cfg.snap_radius.
        cfg: search parameters.

    Raises:
        NoPath: the reachable set was exhausted.
        GoalUnreachable: snapping failed for an endpoint.
        ExpansionBudgetExceeded: gave up after cfg.max_expansions pops.
    """
    w, h = grid.config.width, grid.config.height
    su, sv = start
    gu, gv = goal
    if not (0 <= su < w and 0 <= sv < h and 0 <= gu < w and 0 <= gv < h):
        raise InvalidInput("start/goal cell outside the grid")
    occ = np.ascontiguousarray(grid.cells)
    snap = cfg.snap_radius
    if snap is None:
        snap = 2 * grid.inflation_radius
    su, sv = _snap_to_free(occ, su, sv, snap, "start")
    gu, gv = _snap_to_free(occ, gu, gv, snap, "goal")
    if (su, sv) == (gu, gv):
        return CellPath(((su, sv),), 0.0)
    budget = cfg.max_expansions
    if budget is None:
        budget = 4 * w * h
    status, parent, expansions = _astar_core(
        occ, su, sv, gu, gv, float(cfg.heuristic_weight), budget
    )
    if status == 1:
        raise NoPath(f"goal unreachable after {expansions} expansions")
    if status == 2:
        raise ExpansionBudgetExceeded(f"gave up after {expansions} expansions")
    cells = []
    idx = gv * w + gu
    while idx >= 0:
        cells.append((int(idx % w), int(idx // w)))
        idx = parent[idx]
    cells.reverse()
    return CellPath(tuple(cells), path_cost(cells))


def refine_waypoints(
    path: CellPath, cfg: PlannerConfig, grid_cfg: GridConfig
) -> Waypoints:
    """Keep endpoints, corner cells, and periodic fill-ins along straights.

    An interior cell survives when the heading change between its incoming
    and outgoing steps is at least cfg.theta_th. On top of that a waypoint
    is emitted often enough that consecutive waypoints are never more than
    cfg.waypoint_spacing meters apart along the path.
    """
    cells = path.cells
    if len(cells) == 0:
        raise InvalidInput("cannot refine an empty path")
    if len(cells) <= 2:
        pts = [pixel_to_world(u, v, grid_cfg) for u, v in cells]
        return Waypoints(tuple(pts))

    r = grid_cfg.resolution
    steps = []
    for (u1, v1), (u2, v2) in zip(cells, cells[1:]):
        steps.append(r * SQRT2 if (u1 != u2 and v1 != v2) else r)
    cum = np.concatenate([[0.0], np.cumsum(steps)])

    keep = [0]
    last_kept_at = 0.0
    for i in range(1, len(cells) - 1):
        ax = cells[i][0] - cells[i - 1][0]
        ay = cells[i][1] - cells[i - 1][1]
        bx = cells[i + 1][0] - cells[i][0]
        by = cells[i + 1][1] - cells[i][1]
        dot = ax * bx + ay * by
        norm = math.hypot(ax, ay) * math.hypot(bx, by)
        turn = math.acos(max(-1.0, min(1.0, dot / norm)))
        if turn >= cfg.theta_th:
            keep.append(i)
            last_kept_at = cum[i]
        elif cum[i + 1] - last_kept_at > cfg.waypoint_spacing:
            # The next step would overshoot the spacing budget.
            keep.append(i)
            last_kept_at = cum[i]
    keep.append(len(cells) - 1)
    pts = [pixel_to_world(*cells[i], grid_cfg) for i in keep]
    return Waypoints(tuple(pts))


def plan(
    grid: OccupancyGrid,
    pose: Pose2D,
    goal_xy,
    cfg: PlannerConfig = PlannerConfig(),
) -> PlanResult:
    """Full planning pass: cell path from the robot to the goal, refined.

    Expects an inflated grid; raises InvalidInput otherwise so nobody plans
    footprint-center paths on raw obstacle cells by mistake.
    """
    if not grid.inflated:
        raise InvalidInput("plan requires an inflated grid")
    start = world_to_pixel(pose.x, pose.y, grid.config)
    goal = world_to_pixel(goal_xy[0], goal_xy[1], grid.config)
    path = astar(grid, start, goal, cfg)
    return PlanResult(path, refine_waypoints(path, cfg, grid.config))
