import math

import numpy as np
import pytest

from semnav.errors import InvalidInput
from semnav.global_map import Pose2D, SensorMount
from semnav.local_planner import VelocityCommand
from semnav.simulator.episode import step_robot
from semnav.simulator.sensor import SensorSpec, sense
from semnav.simulator.world import (
    Agent,
    Category,
    Disc,
    Entity,
    Polygon,
    World,
    check_collision,
    check_hazard,
    inside_zone,
    step_agents,
)


def _walker(loop, speed=1.0, phase=0.0, radius=0.25):
    return Agent(radius=radius, height=1.7, speed=speed, loop=tuple(loop), phase=phase)


def test_step_robot_straight_line():
    pose = step_robot(Pose2D(1.0, 2.0, math.pi / 6), VelocityCommand(2.0, 0.0), 0.5)
    assert np.isclose(pose.x, 1.0 + math.cos(math.pi / 6))
    assert np.isclose(pose.y, 2.0 + math.sin(math.pi / 6))
    assert np.isclose(pose.theta, math.pi / 6, atol=1e-12)


def test_step_robot_matches_fine_euler_integration(rng):
    for _ in range(20):
        v = float(rng.uniform(-1, 1.5))
        w = float(rng.uniform(-2, 2))
        theta = float(rng.uniform(-math.pi, math.pi))
        dt = float(rng.uniform(0.05, 0.5))
        got = step_robot(Pose2D(0.0, 0.0, theta), VelocityCommand(v, w), dt)
        x = y = 0.0
        th = theta
        n = 20000
        h = dt / n
        for _ in range(n):
            x += v * math.cos(th) * h
            y += v * math.sin(th) * h
            th += w * h
        assert np.isclose(got.x, x, atol=1e-4)
        assert np.isclose(got.y, y, atol=1e-4)
        assert np.isclose(got.theta, th, atol=1e-9)


def test_step_robot_full_circle_returns_home():
    start = Pose2D(0.3, -0.7, 1.1)
    w = 0.8
    pose = step_robot(start, VelocityCommand(0.5, w), 2 * math.pi / w)
    assert np.isclose(pose.x, start.x, atol=1e-12)
    assert np.isclose(pose.y, start.y, atol=1e-12)
    # poses keep theta normalized, so a full turn lands back on itself
    assert np.isclose(pose.theta, start.theta, atol=1e-9)


def test_agent_validation():
    with pytest.raises(InvalidInput):
        _walker([(0, 0)], speed=1.0)
    with pytest.raises(InvalidInput):
        _walker([(0, 0), (1, 0)], phase=1.0)
    with pytest.raises(InvalidInput):
        Agent(radius=0.0, height=1.7, speed=1.0, loop=((0, 0), (1, 0)))
    with pytest.raises(InvalidInput):
        Agent(radius=0.3, height=1.7, speed=-0.1, loop=((0, 0), (1, 0)))


def test_agent_position_on_two_point_loop():
    agent = _walker([(0.0, -2.0), (0.0, 2.0)])
    assert agent.perimeter == 8.0
    for s, want in [
        (0.0, (0.0, -2.0)),
        (2.0, (0.0, 0.0)),
        (4.0, (0.0, 2.0)),
        (5.0, (0.0, 1.0)),  # heading back down the same segment
        (6.0, (0.0, 0.0)),
        (7.5, (0.0, -1.5)),
        (8.0, (0.0, -2.0)),
    ]:
        agent.s = s
        np.testing.assert_allclose(agent.position(), want, atol=1e-12)


def test_agent_position_on_triangle_loop():
    agent = _walker([(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)])
    assert agent.perimeter == 12.0
    for s, want in [
        (1.5, (1.5, 0.0)),
        (3.0, (3.0, 0.0)),
        (5.5, (1.5, 2.0)),  # halfway along the hypotenuse
        (8.0, (0.0, 4.0)),
        (10.0, (0.0, 2.0)),
        (12.0, (0.0, 0.0)),
    ]:
        agent.s = s
        np.testing.assert_allclose(agent.position(), want, atol=1e-12)


def test_agent_motion_is_continuous(rng):
    """No teleports: consecutive samples differ by at most speed * dt."""
    agent = _walker([(0.0, -2.0), (0.0, 2.0)], speed=0.7, phase=0.37)
    world = World((-5, 5, -5, 5), [], [agent])
    dt = 0.05
    prev = np.asarray(agent.position())
    for _ in range(600):  # several full loops
        step_agents(world, dt)
        cur = np.asarray(agent.position())
        assert np.hypot(*(cur - prev)) <= agent.speed * dt + 1e-9
        prev = cur


def test_phase_offsets_starting_point():
    agent = _walker([(0.0, -2.0), (0.0, 2.0)], phase=0.5)
    np.testing.assert_allclose(agent.position(), (0.0, 2.0), atol=1e-12)
    agent2 = _walker([(0.0, -2.0), (0.0, 2.0)], phase=0.25)
    np.testing.assert_allclose(agent2.position(), (0.0, 0.0), atol=1e-12)


def test_step_agents_wraps_and_ignores_zero_speed():
    mover = _walker([(0.0, -2.0), (0.0, 2.0)], speed=3.0)
    frozen = _walker([(1.0, 0.0), (2.0, 0.0)], speed=0.0, phase=0.5)
    world = World((-5, 5, -5, 5), [], [mover, frozen])
    step_agents(world, 3.0)
    assert mover.s == pytest.approx(1.0)  # 9 mod 8
    np.testing.assert_allclose(mover.position(), (0.0, -1.0), atol=1e-12)
    np.testing.assert_allclose(frozen.position(), (2.0, 0.0), atol=1e-12)


def test_world_rejects_degenerate_bounds():
    with pytest.raises(InvalidInput):
        World((1.0, 1.0, -1.0, 1.0), [], [])


def test_entity_category_rules():
    with pytest.raises(InvalidInput):
        Entity(Disc(0, 0, 1), Category.ZONE, height=0.5, label="wet")
    with pytest.raises(InvalidInput):
        Entity(Disc(0, 0, 1), Category.ZONE, height=0.0)  # label required
    with pytest.raises(InvalidInput):
        Entity(Disc(0, 0, 1), Category.ITEM, height=0.2, label="cable")
    with pytest.raises(InvalidInput):
        Entity(Disc(0, 0, 1), Category.STATIC, height=0.0)
    concave = Polygon(((0, 0), (4, 0), (4, 4), (2, 1), (0, 4)))
    with pytest.raises(InvalidInput):
        Entity(concave, Category.STATIC, height=1.0)
    Entity(concave, Category.ZONE, height=0.0, label="wet")  # flat decals may be concave


def test_check_collision_static_disc():
    column = Entity(Disc(2.0, 0.0, 0.5), Category.STATIC, height=1.5)
    world = World((-5, 5, -5, 5), [column], [])
    assert check_collision(world, 1.2, 0.0, 0.35)  # gap 0.30 < radius
    assert not check_collision(world, 1.0, 0.0, 0.35)  # gap 0.50 > radius
    assert check_collision(world, 1.125, 0.0, 0.375)  # exact touch counts


def test_check_collision_agent_disc():
    agent = _walker([(0.0, -1.0), (0.0, 1.0)], speed=0.0)
    world = World((-5, 5, -5, 5), [], [agent])
    assert check_collision(world, 0.0, -0.45, 0.35)  # 0.55 < 0.60 contact
    assert not check_collision(world, 0.0, -1.7, 0.35)  # 0.70 > 0.60


def test_check_collision_polygon_wall():
    wall = Entity(
        Polygon(((2.0, -3.0), (2.5, -3.0), (2.5, 3.0), (2.0, 3.0))),
        Category.STATIC,
        height=1.5,
    )
    world = World((-5, 5, -5, 5), [wall], [])
    assert check_collision(world, 1.7, 0.0, 0.35)
    assert not check_collision(world, 1.6, 0.0, 0.35)


def test_check_hazard_ignores_static_and_sees_items_and_zones():
    world = World(
        (-5, 5, -5, 5),
        [
            Entity(Disc(2.0, 0.0, 0.5), Category.STATIC, height=1.5),
            Entity(Disc(-2.0, 0.0, 0.3), Category.ITEM, height=0.05, label="cable"),
            Entity(
                Polygon(((0.0, 2.0), (1.0, 2.0), (1.0, 3.0), (0.0, 3.0))),
                Category.ZONE,
                height=0.0,
                label="wet",
            ),
        ],
        [],
    )
    assert not check_hazard(world, 1.8, 0.0, 0.35)  # static is not a hazard
    assert check_hazard(world, -1.5, 0.0, 0.35)  # item overlap
    assert check_hazard(world, 0.5, 2.5, 0.35)  # inside the zone
    assert check_hazard(world, 0.5, 1.8, 0.35)  # disc overlaps the edge
    assert not check_hazard(world, 0.5, 1.0, 0.35)


def test_inside_zone_point_membership():
    world = World(
        (-5, 5, -5, 5),
        [
            Entity(
                Polygon(((0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0))),
                Category.ZONE,
                height=0.0,
                label="wet",
            ),
            Entity(Disc(-3.0, 0.0, 0.5), Category.ZONE, height=0.0, label="oil"),
        ],
        [],
    )
    assert inside_zone(world, 1.0, 1.0)
    assert not inside_zone(world, 3.0, 3.0)
    assert inside_zone(world, -3.2, 0.0)
    assert not inside_zone(world, -3.0, 0.6)


def _narrow_spec(pitch=0.0):
    return SensorSpec(
        width=3,
        height=3,
        h_fov=math.radians(20.0),
        v_fov=math.radians(20.0),
        depth_min=0.3,
        depth_max=10.0,
        mount=SensorMount(height=0.6, pitch=pitch),
    )


def test_sense_empty_world_sees_nothing():
    spec = _narrow_spec()
    depth, mask = sense(World((-9, 9, -9, 9), [], []), Pose2D(0, 0, 0), spec)
    assert (depth.data == 0.0).all()
    assert (mask.data == 0).all()


def test_sense_center_ray_hits_wall_at_exact_range():
    wall = Entity(
        Polygon(((2.0, -3.0), (2.5, -3.0), (2.5, 3.0), (2.0, 3.0))),
        Category.STATIC,
        height=2.0,
    )
    spec = _narrow_spec()
    depth, _ = sense(World((-9, 9, -9, 9), [wall], []), Pose2D(0, 0, 0), spec)
    assert np.isclose(depth.data[1, 1], 2.0, atol=1e-9)


def test_sense_cylinder_and_occlusion():
    column = Entity(Disc(3.0, 0.0, 0.5), Category.STATIC, height=2.0)
    agent = _walker([(2.0, 0.0), (2.0, 1.0)], speed=0.0)
    spec = _narrow_spec()
    far_only = sense(World((-9, 9, -9, 9), [column], []), Pose2D(0, 0, 0), spec)[0]
    assert np.isclose(far_only.data[1, 1], 2.5, atol=1e-9)
    both = sense(World((-9, 9, -9, 9), [column], [agent]), Pose2D(0, 0, 0), spec)[0]
    assert np.isclose(both.data[1, 1], 1.75, atol=1e-9)  # agent in front wins


def test_sense_respects_depth_range():
    near = Entity(
        Polygon(((0.2, -3.0), (0.3, -3.0), (0.3, 3.0), (0.2, 3.0))),
        Category.STATIC,
        height=2.0,
    )
    far = Entity(Disc(30.0, 0.0, 0.5), Category.STATIC, height=2.0)
    spec = _narrow_spec()
    depth, _ = sense(World((-99, 99, -99, 99), [near, far], []), Pose2D(0, 0, 0), spec)
    assert (depth.data == 0.0).all()  # closer than depth_min, farther than max


def test_sense_marks_beware_zone_pixels():
    zone = Entity(Disc(0.6, 0.0, 0.3), Category.ZONE, height=0.0, label="wet")
    world = World((-9, 9, -9, 9), [zone], [])
    spec = _narrow_spec(pitch=math.radians(-45.0))
    pose = Pose2D(0, 0, 0)
    depth, mask = sense(world, pose, spec, beware=("wet",))
    assert mask.data[1, 1] == 1
    assert np.isclose(depth.data[1, 1], 0.6 * math.sqrt(2.0), atol=1e-9)
    _, unmasked = sense(world, pose, spec)
    assert (unmasked.data == 0).all()


def test_sense_behind_camera_is_invisible():
    wall = Entity(
        Polygon(((-2.5, -3.0), (-2.0, -3.0), (-2.0, 3.0), (-2.5, 3.0))),
        Category.STATIC,
        height=2.0,
    )
    spec = _narrow_spec()
    depth, _ = sense(World((-9, 9, -9, 9), [wall], []), Pose2D(0, 0, 0), spec)
    assert (depth.data == 0.0).all()
