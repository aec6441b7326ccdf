import math

import numpy as np
import pytest

from semnav.errors import InvalidInput
from semnav.global_map import Pose2D
from semnav.global_planner import CellPath, PlanResult, Waypoints
from semnav.local_planner import (
    STOP,
    LocalConfig,
    MissionTracker,
    generate_primitives,
    select_command,
)
from semnav.occupancy_grid import OCCUPIED, world_to_pixel_array

from conftest import empty_grid


def _euler_rollout(v, omega, horizon, dt):
    steps = max(1, round(horizon / dt))
    poses = []
    x = y = theta = 0.0
    for _ in range(steps):
        x += v * math.cos(theta) * dt
        y += v * math.sin(theta) * dt
        theta += omega * dt
        poses.append((x, y, theta))
    return np.asarray(poses)


def test_primitive_grid_shape_and_rotate_pair():
    cfg = LocalConfig()
    prims = generate_primitives(cfg)
    assert len(prims) == 5 * 15 + 2
    speeds = sorted({p.v for p in prims if p.v > 0})
    np.testing.assert_allclose(speeds, np.linspace(0.2, 1.0, 5))
    rates = sorted({p.omega for p in prims[:-2]})
    np.testing.assert_allclose(rates, np.linspace(-1.5, 1.5, 15))
    tail = [(p.v, p.omega) for p in prims[-2:]]
    assert tail == [(0.0, 0.75), (0.0, -0.75)]


def test_rollouts_match_independent_euler_integration():
    cfg = LocalConfig()
    for prim in generate_primitives(cfg):
        want = _euler_rollout(prim.v, prim.omega, cfg.horizon, cfg.dt)
        np.testing.assert_allclose(prim.poses, want, atol=1e-12)


def test_straight_rollout_is_exact():
    cfg = LocalConfig()
    prims = generate_primitives(cfg)
    straight = next(p for p in prims if p.omega == 0.0 and p.v == 1.0)
    np.testing.assert_allclose(straight.poses[-1], [2.0, 0.0, 0.0], atol=1e-12)
    assert straight.poses.shape == (20, 3)


def test_fine_step_arc_approaches_exact_circle():
    cfg = LocalConfig(dt=0.001, horizon=math.pi / 2)
    prims = generate_primitives(cfg)
    arc = next(p for p in prims if np.isclose(p.v, 1.0) and np.isclose(p.omega, 1.5))
    x, y, theta = arc.poses[-1]
    t = len(arc.poses) * cfg.dt
    radius = arc.v / arc.omega
    assert np.isclose(x, radius * math.sin(arc.omega * t), atol=5e-3)
    assert np.isclose(y, radius * (1.0 - math.cos(arc.omega * t)), atol=5e-3)
    assert np.isclose(theta, arc.omega * t)


def test_mirrored_turn_rates_mirror_the_path():
    cfg = LocalConfig()
    prims = generate_primitives(cfg)
    left = next(p for p in prims if p.v == 1.0 and np.isclose(p.omega, 1.5))
    right = next(p for p in prims if p.v == 1.0 and np.isclose(p.omega, -1.5))
    np.testing.assert_allclose(left.poses[:, 0], right.poses[:, 0])
    np.testing.assert_allclose(left.poses[:, 1], -right.poses[:, 1])


def test_config_validation():
    with pytest.raises(InvalidInput):
        LocalConfig(v_min=1.2, v_max=1.0)
    with pytest.raises(InvalidInput):
        LocalConfig(dt=0.0)
    with pytest.raises(InvalidInput):
        LocalConfig(n_speeds=0)
    with pytest.raises(InvalidInput):
        LocalConfig(clearance_cap=0.0)


def test_open_grid_drives_full_speed_at_distant_waypoint():
    grid = empty_grid(200, 200, 0.05)
    cfg = LocalConfig()
    prims = generate_primitives(cfg)
    cmd = select_command(grid, Pose2D(0.0, 0.0, 0.0), (8.0, 0.0), prims, cfg)
    assert cmd.v == cfg.v_max and cmd.omega == 0.0


def test_endpoint_distance_prefers_matching_speed():
    # waypoint 0.8 m ahead lands exactly on the 0.4 m/s endpoint; every
    # other straight rollout misses it by at least 0.4 m
    grid = empty_grid(200, 200, 0.05)
    cfg = LocalConfig()
    prims = generate_primitives(cfg)
    cmd = select_command(grid, Pose2D(0.0, 0.0, 0.0), (0.8, 0.0), prims, cfg)
    assert np.isclose(cmd.v, 0.4) and cmd.omega == 0.0


def test_lateral_waypoint_turns_toward_it():
    grid = empty_grid(200, 200, 0.05)
    cfg = LocalConfig()
    prims = generate_primitives(cfg)
    cmd = select_command(grid, Pose2D(0.0, 0.0, 0.0), (0.0, 5.0), prims, cfg)
    assert cmd.omega > 0.0
    mirrored = select_command(grid, Pose2D(0.0, 0.0, 0.0), (0.0, -5.0), prims, cfg)
    assert mirrored.omega < 0.0


def test_fully_blocked_grid_falls_back_to_rotation():
    grid = empty_grid(200, 200, 0.05)
    grid.cells[:, :] = OCCUPIED
    cfg = LocalConfig()
    prims = generate_primitives(cfg)
    cmd = select_command(grid, Pose2D(0.0, 0.0, 0.0), (0.0, 3.0), prims, cfg)
    assert (cmd.v, cmd.omega) == (0.0, cfg.omega_max / 2.0)
    away = select_command(grid, Pose2D(0.0, 0.0, 0.0), (0.0, -3.0), prims, cfg)
    assert (away.v, away.omega) == (0.0, -cfg.omega_max / 2.0)


def test_selected_primitive_never_crosses_occupied_cells(rng):
    """Every returned command is either a clean rollout or the fallback."""
    cfg = LocalConfig()
    prims = generate_primitives(cfg)
    by_twist = {(p.v, p.omega): p for p in prims}
    for _ in range(30):
        grid = empty_grid(80, 80, 0.1)
        grid.cells[rng.random((80, 80)) < 0.2] = OCCUPIED
        pose = Pose2D(
            float(rng.uniform(-1.5, 1.5)),
            float(rng.uniform(-1.5, 1.5)),
            float(rng.uniform(-math.pi, math.pi)),
        )
        waypoint = (float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)))
        cmd = select_command(grid, pose, waypoint, prims, cfg)
        prim = by_twist[(cmd.v, cmd.omega)]
        c, s = math.cos(pose.theta), math.sin(pose.theta)
        wx = prim.poses[:, 0] * c - prim.poses[:, 1] * s + pose.x
        wy = prim.poses[:, 0] * s + prim.poses[:, 1] * c + pose.y
        u, v, ok = world_to_pixel_array(np.column_stack([wx, wy]), grid.config)
        hit = (grid.cells[v[ok], u[ok]] != 0).any()
        if cmd.v == 0.0 and abs(cmd.omega) == cfg.omega_max / 2.0:
            continue  # rotate: either survives scoring or is the fallback
        assert not hit


def _fake_plan(waypoints):
    cells = tuple((i, 0) for i in range(len(waypoints)))
    return PlanResult(CellPath(cells, 0.0), Waypoints(tuple(waypoints)))


def test_tracker_requires_goals():
    with pytest.raises(InvalidInput):
        MissionTracker([])


def test_tracker_reports_stale_plan_until_one_is_set():
    grid = empty_grid(64, 64, 0.1)
    tracker = MissionTracker([(2.0, 0.0)])
    result = tracker.step(Pose2D(0.0, 0.0, 0.0), grid, map_version=0)
    assert result.event == "plan_stale" and result.command == STOP

    tracker.set_plan(_fake_plan([(0.0, 0.0), (2.0, 0.0)]), 0, Pose2D(0.0, 0.0, 0.0))
    moving = tracker.step(Pose2D(0.0, 0.0, 0.0), grid, map_version=0)
    assert moving.event != "plan_stale" and moving.command.v > 0

    stale = tracker.step(Pose2D(0.0, 0.0, 0.0), grid, map_version=1)
    assert stale.event == "plan_stale" and stale.command == STOP


def test_tracker_goal_sequencing():
    grid = empty_grid(64, 64, 0.1)
    tracker = MissionTracker([(1.0, 0.0), (2.0, 0.0)])
    assert tracker.current_goal == (1.0, 0.0)

    hit = tracker.step(Pose2D(0.95, 0.0, 0.0), grid, 0)
    assert hit.event == "goal_reached" and hit.goal_index == 0
    assert hit.command == STOP
    assert tracker.current_goal == (2.0, 0.0)
    assert tracker.plan is None  # forces a replan toward the new goal

    done = tracker.step(Pose2D(2.1, 0.0, 0.0), grid, 0)
    assert done.event == "goal_reached" and done.goal_index == 1
    assert tracker.mission_complete and tracker.current_goal is None

    after = tracker.step(Pose2D(2.1, 0.0, 0.0), grid, 0)
    assert after.command == STOP and after.event is None


def test_tracker_advances_waypoints_but_not_past_the_last():
    grid = empty_grid(64, 64, 0.1)
    tracker = MissionTracker([(6.0, 0.0)], LocalConfig())
    plan = _fake_plan([(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)])
    tracker.set_plan(plan, 0, Pose2D(0.0, 0.0, 0.0))
    assert tracker.waypoint_index == 1  # start waypoint already inside radius

    adv = tracker.step(Pose2D(0.9, 0.0, 0.0), grid, 0)
    assert adv.event == "waypoint_advanced"
    assert tracker.waypoint_index == 2

    near_last = tracker.step(Pose2D(2.9, 0.0, 0.0), grid, 0)
    assert near_last.event is None
    assert tracker.waypoint_index == 2  # chases the final waypoint forever
