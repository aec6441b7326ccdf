"""World model for the simulator: entities, hazards and walking agents."""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import InvalidInput
from ..geometry import (
    point_polygon_distance,
    points_in_polygon,
    polygon_area,
    polygon_is_convex,
)


class Category(Enum):
    STATIC = "static"
    ITEM = "item"
    ZONE = "zone"


@dataclass(frozen=True)
class Disc:
    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidInput("disc radius must be positive")


@dataclass(frozen=True)
class Polygon:
    vertices: tuple  # ((x, y), ...), implicitly closed

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise InvalidInput("polygon needs at least 3 vertices")
        if abs(polygon_area(self.vertices)) < 1e-9:
            raise InvalidInput("polygon is degenerate")


@dataclass(frozen=True)
class Entity:
    """A piece of world geometry.

    STATIC entities are solid obstacles. ITEM entities are small hazards the
    robot could physically drive over (height under 0.10 m). ZONE entities
    are flat ground markings (height 0). Extruded polygon entities must be
    convex; build concave walls from several convex pieces.
    """

    shape: object
    category: Category
    height: float
    label: str | None = None
    color: tuple = (128, 128, 128)

    def __post_init__(self):
        if self.category is Category.ZONE:
            if self.height != 0.0:
                raise InvalidInput("zones must have height 0")
            if self.label is None:
                raise InvalidInput("zones need a class label")
        elif self.category is Category.ITEM:
            if not (0 <= self.height < 0.10):
                raise InvalidInput("items must be under 0.10 m tall")
            if self.label is None:
                raise InvalidInput("items need a class label")
        else:
            if self.height <= 0:
                raise InvalidInput("static entities need positive height")
        if (
            self.height > 0
            and isinstance(self.shape, Polygon)
            and not polygon_is_convex(self.shape.vertices)
        ):
            raise InvalidInput("extruded polygons must be convex")

    def bounding_circle(self):
        if isinstance(self.shape, Disc):
            return self.shape.cx, self.shape.cy, self.shape.radius
        pts = np.asarray(self.shape.vertices)
        cx, cy = pts.mean(axis=0)
        r = float(np.hypot(pts[:, 0] - cx, pts[:, 1] - cy).max())
        return float(cx), float(cy), r


@dataclass
class Agent:
    """Disc-shaped walker looping along a closed polyline at fixed speed.

    `s` is the current arc-length offset; phase ([0, 1)) sets where on the
    loop the walk starts.
    """

    radius: float
    height: float
    speed: float
    loop: tuple
    phase: float = 0.0
    color: tuple = (80, 80, 200)
    s: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.radius <= 0 or self.height <= 0 or self.speed < 0:
            raise InvalidInput("bad agent parameters")
        if len(self.loop) < 2:
            raise InvalidInput("agent loop needs at least 2 waypoints")
        if not (0 <= self.phase < 1):
            raise InvalidInput("phase must be in [0, 1)")
        self.reset()

    def _segments(self):
        pts = [np.asarray(p, dtype=float) for p in self.loop]
        pts.append(pts[0])
        lengths = [float(np.hypot(*(b - a))) for a, b in zip(pts, pts[1:])]
        return pts, lengths

    @property
    def perimeter(self) -> float:
        return sum(self._segments()[1])

    def reset(self):
        self.s = self.phase * self.perimeter

    def position(self):
        pts, lengths = self._segments()
        total = sum(lengths)
        s = self.s % total
        last = len(lengths) - 1
        for i, (a, b, seg) in enumerate(zip(pts, pts[1:], lengths)):
            if s <= seg or i == last:
                if seg == 0.0:
                    return float(a[0]), float(a[1])
                t = min(1.0, s / seg)
                p = a + t * (b - a)
                return float(p[0]), float(p[1])
            s -= seg
        return float(pts[0][0]), float(pts[0][1])


@dataclass
class World:
    bounds: tuple  # (xmin, xmax, ymin, ymax)
    entities: list
    agents: list

    def __post_init__(self):
        xmin, xmax, ymin, ymax = self.bounds
        if not (xmin < xmax and ymin < ymax):
            raise InvalidInput("degenerate world bounds")

    def reset_agents(self):
        for a in self.agents:
            a.reset()

    def by_category(self, *cats):
        wanted = set(cats)
        return [e for e in self.entities if e.category in wanted]


def step_agents(world: World, dt: float) -> None:
    """Advance every agent along its loop by speed * dt."""
    for a in world.agents:
        total = a.perimeter
        if total > 0:
            a.s = (a.s + a.speed * dt) % total


def _shape_distance(shape, x: float, y: float) -> float:
    if isinstance(shape, Disc):
        return max(0.0, math.hypot(x - shape.cx, y - shape.cy) - shape.radius)
    return point_polygon_distance(x, y, shape.vertices)


def check_collision(world: World, x: float, y: float, robot_radius: float) -> bool:
    """Robot disc against solid geometry: static entities and agents."""
    for e in world.entities:
        if e.category is not Category.STATIC:
            continue
        if _shape_distance(e.shape, x, y) <= robot_radius:
            return True
    for a in world.agents:
        ax, ay = a.position()
        if math.hypot(x - ax, y - ay) <= robot_radius + a.radius:
            return True
    return False


def check_hazard(world: World, x: float, y: float, robot_radius: float) -> bool:
    """Robot disc against hazard geometry (all items and zones).

    Deliberately independent of the active beware list: it measures ground
    truth, so runs with semantics disabled still count their transgressions.
    """
    for e in world.entities:
        if e.category is Category.STATIC:
            continue
        if _shape_distance(e.shape, x, y) <= robot_radius:
            return True
    return False


def inside_zone(world: World, x: float, y: float) -> bool:
    for e in world.by_category(Category.ZONE):
        if isinstance(e.shape, Polygon) and bool(
            points_in_polygon(np.array([[x, y]]), e.shape.vertices)[0]
        ):
            return True
        if isinstance(e.shape, Disc) and math.hypot(
            x - e.shape.cx, y - e.shape.cy
        ) <= e.shape.radius:
            return True
    return False
