import heapq
import math

import numpy as np
import pytest

from semnav.errors import (
    ExpansionBudgetExceeded,
    GoalUnreachable,
    InvalidInput,
    NoPath,
)
from semnav.global_map import Pose2D
from semnav.global_planner import (
    CellPath,
    PlannerConfig,
    astar,
    octile,
    path_cost,
    plan,
    refine_waypoints,
)
from semnav.occupancy_grid import OCCUPIED, GridConfig, pixel_to_world

from conftest import empty_grid, grid_from_art

SQRT2 = math.sqrt(2.0)


def _dijkstra(occ, start, goal):
    """Uniform-cost search over the same 8-connected move set.

    Returns the optimal cost or None when the goal is unreachable. Written
    independently of the planner so the two can disagree.
    """
    h, w = occ.shape
    moves = [
        (1, 0, 1.0),
        (-1, 0, 1.0),
        (0, 1, 1.0),
        (0, -1, 1.0),
        (1, 1, SQRT2),
        (1, -1, SQRT2),
        (-1, 1, SQRT2),
        (-1, -1, SQRT2),
    ]
    dist = {start: 0.0}
    pq = [(0.0, start)]
    while pq:
        g, (u, v) = heapq.heappop(pq)
        if g > dist.get((u, v), math.inf):
            continue
        if (u, v) == goal:
            return g
        for du, dv, c in moves:
            nu, nv = u + du, v + dv
            if not (0 <= nu < w and 0 <= nv < h):
                continue
            if occ[nv, nu]:
                continue
            if du and dv and occ[v, nu] and occ[nv, u]:
                continue
            ng = g + c
            if ng < dist.get((nu, nv), math.inf):
                dist[(nu, nv)] = ng
                heapq.heappush(pq, (ng, (nu, nv)))
    return None


def _check_path(path, occ, start, goal):
    assert path.cells[0] == start
    assert path.cells[-1] == goal
    for (u1, v1), (u2, v2) in zip(path.cells, path.cells[1:]):
        assert max(abs(u2 - u1), abs(v2 - v1)) == 1
        assert not occ[v2, u2]
        if u1 != u2 and v1 != v2:
            assert not (occ[v1, u2] and occ[v2, u1])
    assert np.isclose(path.total_cost, path_cost(path.cells))


def test_astar_matches_dijkstra_on_random_grids(rng):
    start, goal = (0, 0), (17, 17)
    reachable = 0
    for _ in range(30):
        grid = empty_grid(18, 18, 1.0)
        grid.cells[rng.random((18, 18)) < 0.25] = OCCUPIED
        grid.cells[0, 0] = 0
        grid.cells[17, 17] = 0
        occ = grid.cells != 0
        want = _dijkstra(occ, start, goal)
        if want is None:
            with pytest.raises(NoPath):
                astar(grid, start, goal)
            continue
        path = astar(grid, start, goal)
        _check_path(path, occ, start, goal)
        assert np.isclose(path.total_cost, want)
        reachable += 1
    assert reachable >= 5  # the sweep actually exercised full searches


def test_astar_costs_on_empty_grid():
    grid = empty_grid(20, 20, 1.0)
    straight = astar(grid, (2, 2), (12, 2))
    assert np.isclose(straight.total_cost, 10.0)
    diagonal = astar(grid, (2, 2), (10, 10))
    assert np.isclose(diagonal.total_cost, 8 * SQRT2)


def test_astar_start_equals_goal():
    grid = empty_grid(10, 10, 1.0)
    path = astar(grid, (4, 4), (4, 4))
    assert path.cells == ((4, 4),) and path.total_cost == 0.0


def test_diagonal_allowed_past_single_blocked_side():
    grid = grid_from_art(
        """
        #.
        ..
        """
    )
    path = astar(grid, (0, 0), (1, 1))
    assert path.cells == ((0, 0), (1, 1))


def test_diagonal_blocked_between_two_occupied_cells():
    grid = grid_from_art(
        """
        ##..
        ##..
        ..##
        ..##
        """
    )
    with pytest.raises(NoPath):
        astar(grid, (0, 0), (3, 3))


def test_astar_rejects_cells_outside_grid():
    grid = empty_grid(10, 10, 1.0)
    with pytest.raises(InvalidInput):
        astar(grid, (-1, 0), (5, 5))
    with pytest.raises(InvalidInput):
        astar(grid, (0, 0), (10, 5))


def test_occupied_endpoints_snap_to_nearest_free():
    grid = empty_grid(16, 16, 1.0)
    grid.cells[5, 5] = OCCUPIED
    cfg = PlannerConfig(snap_radius=2)
    path = astar(grid, (5, 5), (10, 5), cfg)
    # tie order is (distance^2, dv, du), so the cell below wins
    assert path.cells[0] == (5, 4)
    assert path.cells[-1] == (10, 5)


def test_snap_failure_raises_goal_unreachable():
    grid = empty_grid(16, 16, 1.0)
    grid.cells[3:8, 3:8] = OCCUPIED
    with pytest.raises(GoalUnreachable):
        astar(grid, (5, 5), (12, 12), PlannerConfig(snap_radius=2))


def test_expansion_budget_exceeded():
    grid = empty_grid(20, 20, 1.0)
    with pytest.raises(ExpansionBudgetExceeded):
        astar(grid, (1, 1), (18, 18), PlannerConfig(max_expansions=3))


def test_weighted_search_stays_at_least_optimal_cost(rng):
    for _ in range(10):
        grid = empty_grid(18, 18, 1.0)
        grid.cells[rng.random((18, 18)) < 0.2] = OCCUPIED
        grid.cells[0, 0] = 0
        grid.cells[17, 17] = 0
        best = _dijkstra(grid.cells != 0, (0, 0), (17, 17))
        if best is None:
            continue
        greedy = astar(grid, (0, 0), (17, 17), PlannerConfig(heuristic_weight=2.0))
        assert greedy.total_cost >= best - 1e-9


def test_planner_config_validation():
    with pytest.raises(InvalidInput):
        PlannerConfig(theta_th=0.0)
    with pytest.raises(InvalidInput):
        PlannerConfig(heuristic_weight=0.9)
    with pytest.raises(InvalidInput):
        PlannerConfig(waypoint_spacing=0.0)


def test_octile_closed_form(rng):
    for _ in range(50):
        du = int(rng.integers(-30, 31))
        dv = int(rng.integers(-30, 31))
        lo, hi = sorted((abs(du), abs(dv)))
        assert np.isclose(octile(du, dv), (hi - lo) + SQRT2 * lo)


def test_path_cost_mixes_step_kinds():
    cells = [(0, 0), (1, 0), (2, 1), (3, 2), (3, 3)]
    assert np.isclose(path_cost(cells), 2.0 + 2 * SQRT2)
    assert path_cost([(4, 4)]) == 0.0


def _line(a, b):
    (u1, v1), (u2, v2) = a, b
    n = max(abs(u2 - u1), abs(v2 - v1))
    du = (u2 - u1) // n
    dv = (v2 - v1) // n
    return [(u1 + k * du, v1 + k * dv) for k in range(n + 1)]


def test_refine_keeps_endpoints_and_corners():
    cells = _line((0, 0), (5, 0)) + _line((5, 0), (5, 5))[1:]
    path = CellPath(tuple(cells), path_cost(cells))
    gcfg = GridConfig(1.0, 12, 12)
    wps = refine_waypoints(path, PlannerConfig(waypoint_spacing=100.0), gcfg)
    want = [pixel_to_world(u, v, gcfg) for u, v in [(0, 0), (5, 0), (5, 5)]]
    assert list(wps.points) == want


def test_refine_turn_threshold_filters_shallow_bends():
    cells = _line((0, 0), (4, 0)) + _line((4, 0), (8, 4))[1:]
    path = CellPath(tuple(cells), path_cost(cells))
    gcfg = GridConfig(1.0, 20, 20)
    loose = refine_waypoints(
        path, PlannerConfig(theta_th=math.radians(60), waypoint_spacing=100.0), gcfg
    )
    assert len(loose) == 2  # 45 degree bend dropped
    tight = refine_waypoints(
        path, PlannerConfig(theta_th=math.radians(30), waypoint_spacing=100.0), gcfg
    )
    assert len(tight) == 3
    assert tight.points[1] == pixel_to_world(4, 0, gcfg)


def test_refine_spacing_inserts_fill_in_waypoints():
    cells = _line((0, 10), (29, 10))
    path = CellPath(tuple(cells), path_cost(cells))
    gcfg = GridConfig(1.0, 60, 60)
    wps = refine_waypoints(path, PlannerConfig(waypoint_spacing=2.0), gcfg)
    pts = np.asarray(wps.points)
    gaps = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    assert (gaps <= 2.0 + 1e-9).all()
    assert tuple(pts[0]) == pixel_to_world(0, 10, gcfg)
    assert tuple(pts[-1]) == pixel_to_world(29, 10, gcfg)


def test_refine_short_paths_pass_through():
    gcfg = GridConfig(0.5, 8, 8)
    single = refine_waypoints(CellPath(((2, 2),), 0.0), PlannerConfig(), gcfg)
    assert single.points == (pixel_to_world(2, 2, gcfg),)
    with pytest.raises(InvalidInput):
        refine_waypoints(CellPath((), 0.0), PlannerConfig(), gcfg)


def test_plan_requires_inflated_grid():
    grid = empty_grid(20, 20, 0.1)
    with pytest.raises(InvalidInput):
        plan(grid, Pose2D(0.0, 0.0, 0.0), (0.5, 0.5))


def test_plan_end_to_end_on_inflated_grid():
    from semnav.occupancy_grid import InflationParams, inflate

    grid = grid_from_art(
        """
        ............
        ............
        ............
        .....##.....
        .....##.....
        .....##.....
        .....##.....
        ............
        ............
        ............
        ............
        ............
        """,
        resolution=0.5,
    )
    fat = inflate(grid, InflationParams(1.0, 0.0))
    result = plan(fat, Pose2D(-2.2, 0.3, 0.0), (2.2, 0.3))
    assert result.waypoints.points[0] == pixel_to_world(1, 6, fat.config)
    assert len(result.path.cells) >= 10
    occ = fat.cells != 0
    for u, v in result.path.cells:
        assert not occ[v, u]
