"""Constant-twist motion primitives and waypoint-chasing command selection."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .geometry import normalize_angle
from .global_map import Pose2D
from .global_planner import PlanResult
from .occupancy_grid import OccupancyGrid, clearance_field_m, world_to_pixel_array


@dataclass(frozen=True)
class VelocityCommand:
    v: float
    omega: float


STOP = VelocityCommand(0.0, 0.0)


@dataclass(frozen=True)
class LocalConfig:
    v_max: float = 1.0
    omega_max: float = 1.5
    v_min: float = 0.2
    n_speeds: int = 5
    n_turn_rates: int = 15
    horizon: float = 2.0
    dt: float = 0.1
    waypoint_reached_radius: float = 0.5
    goal_reached_radius: float = 0.3
    w_dist: float = 1.0
    w_heading: float = 0.3
    w_clearance: float = 0.2
    clearance_cap: float = 1.0

    def __post_init__(self):
        if not (0 < self.v_min <= self.v_max):
            raise InvalidInput("need 0 < v_min <= v_max")
        if self.omega_max <= 0 or self.horizon <= 0 or self.dt <= 0:
            raise InvalidInput("omega_max, horizon and dt must be positive")
        if self.n_speeds < 1 or self.n_turn_rates < 1:
            raise InvalidInput("primitive grid must be non-empty")
        if self.clearance_cap <= 0:
            raise InvalidInput("clearance_cap must be positive")


@dataclass(frozen=True)
class MotionPrimitive:
    """One (v, omega) pair rolled out by forward Euler in the robot frame.

    poses holds the sampled (x, y, theta) after each integration step,
    so poses[-1] is the endpoint at the horizon.
    """

    v: float
    omega: float
    poses: np.ndarray = field(repr=False)


def _rollout(v: float, omega: float, horizon: float, dt: float) -> np.ndarray:
    steps = max(1, round(horizon / dt))
    out = np.empty((steps, 3))
    x = y = theta = 0.0
    for k in range(steps):
        x += v * math.cos(theta) * dt
        y += v * math.sin(theta) * dt
        theta += omega * dt
        out[k, 0] = x
        out[k, 1] = y
        out[k, 2] = theta
    return out


def generate_primitives(cfg: LocalConfig = LocalConfig()):
    """The speed x turn-rate grid plus a rotate-in-place pair.

    List order is the deterministic tie-break order for scoring.
    """
    speeds = np.linspace(cfg.v_min, cfg.v_max, cfg.n_speeds)
    turn_rates = np.linspace(-cfg.omega_max, cfg.omega_max, cfg.n_turn_rates)
    prims = []
    for v in speeds:
        for w in turn_rates:
            prims.append(MotionPrimitive(float(v), float(w), _rollout(v, w, cfg.horizon, cfg.dt)))
    half = cfg.omega_max / 2.0
    for w in (half, -half):
        prims.append(MotionPrimitive(0.0, w, _rollout(0.0, w, cfg.horizon, cfg.dt)))
    return prims


def _rotate_toward(pose: Pose2D, waypoint, cfg: LocalConfig) -> VelocityCommand:
    bearing = math.atan2(waypoint[1] - pose.y, waypoint[0] - pose.x)
    err = normalize_angle(bearing - pose.theta)
    return VelocityCommand(0.0, cfg.omega_max / 2.0 if err >= 0 else -cfg.omega_max / 2.0)


def select_command(
    grid: OccupancyGrid,
    pose: Pose2D,
    waypoint,
    prims,
    cfg: LocalConfig = LocalConfig(),
    clearance_m: np.ndarray | None = None,
) -> VelocityCommand:
    """Pick the surviving primitive that best chases the waypoint.

    Primitives whose rollout touches an occupied cell are discarded; cells
    off the grid count as free, matching the unknown-as-free planning rule.
    Survivors are scored by endpoint distance to the waypoint, heading error
    toward it, and lack of clearance. Falls back to rotating in place toward
    the waypoint when everything collides.

    clearance_m optionally supplies a precomputed distance field for `grid`
    (meters to the nearest occupied cell) so the 10 Hz loop does not rebuild
    it every tick.
    """
    samples = np.stack([p.poses for p in prims])  # (P, S, 3)
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    wx = samples[:, :, 0] * c - samples[:, :, 1] * s + pose.x
    wy = samples[:, :, 0] * s + samples[:, :, 1] * c + pose.y

    cfg_g = grid.config
    u, v, ok = world_to_pixel_array(
        np.column_stack([wx.ravel(), wy.ravel()]), cfg_g
    )
    shape = wx.shape
    occupied = np.zeros(u.shape, dtype=bool)
    occupied[ok] = grid.cells[v[ok], u[ok]] != 0
    dead = occupied.reshape(shape).any(axis=1)
    if dead.all():
        return _rotate_toward(pose, waypoint, cfg)

    if clearance_m is None:
        clearance_m = clearance_field_m(grid)
    sample_clear = np.full(u.shape, np.inf)
    sample_clear[ok] = clearance_m[v[ok], u[ok]]
    clear = sample_clear.reshape(shape).min(axis=1)
    clear = np.clip(clear / cfg.clearance_cap, 0.0, 1.0)

    ex = wx[:, -1]
    ey = wy[:, -1]
    etheta = pose.theta + samples[:, -1, 2]
    dist = np.hypot(waypoint[0] - ex, waypoint[1] - ey)
    # Desired bearing is measured from the current pose, not the endpoint:
    # an endpoint that lands on (or just past) the waypoint would flip the
    # endpoint bearing by ~pi and make every moving primitive look terrible.
    bearing = math.atan2(waypoint[1] - pose.y, waypoint[0] - pose.x)
    heading_err = np.abs(
        np.arctan2(np.sin(bearing - etheta), np.cos(bearing - etheta))
    )

    score = cfg.w_dist * dist + cfg.w_heading * heading_err + cfg.w_clearance * (1.0 - clear)
    score[dead] = np.inf
    best = int(np.argmin(score))  # first index wins ties
    return VelocityCommand(prims[best].v, prims[best].omega)


@dataclass
class StepResult:
    command: VelocityCommand
    event: str | None = None
    goal_index: int | None = None


class MissionTracker:
    """Sequences goals and waypoints; one instance per episode.

    step() reports one of:
      * 'goal_reached'  - current goal entered its radius (stop this tick;
        the caller advances by replanning toward current_goal, now the next
        one, or finishes the mission when none remain),
      * 'plan_stale'    - no plan, or the map moved on since the plan was
        made (stop this tick; caller must replan),
      * 'waypoint_advanced' or None with a velocity command otherwise.
    """

    def __init__(self, goals, cfg: LocalConfig = LocalConfig(), prims=None):
        if not goals:
            raise InvalidInput("mission needs at least one goal")
        self.goals = [tuple(g) for g in goals]
        self.cfg = cfg
        self.prims = prims if prims is not None else generate_primitives(cfg)
        self.goal_index = 0
        self.plan: PlanResult | None = None
        self.plan_version = -1
        self.waypoint_index = 0

    @property
    def mission_complete(self) -> bool:
        return self.goal_index >= len(self.goals)

    @property
    def current_goal(self):
        return None if self.mission_complete else self.goals[self.goal_index]

    def set_plan(self, plan: PlanResult, map_version: int, pose: Pose2D) -> None:
        self.plan = plan
        self.plan_version = map_version
        pts = plan.waypoints.points
        idx = 0
        while (
            idx < len(pts) - 1
            and math.hypot(pts[idx][0] - pose.x, pts[idx][1] - pose.y)
            <= self.cfg.waypoint_reached_radius
        ):
            idx += 1
        self.waypoint_index = idx

    def step(
        self,
        pose: Pose2D,
        grid: OccupancyGrid,
        map_version: int,
        clearance_m: np.ndarray | None = None,
    ) -> StepResult:
        if self.mission_complete:
            return StepResult(STOP)
        gx, gy = self.goals[self.goal_index]
        if math.hypot(gx - pose.x, gy - pose.y) <= self.cfg.goal_reached_radius:
            reached = self.goal_index
            self.goal_index += 1
            self.plan = None
            return StepResult(STOP, "goal_reached", reached)
        if self.plan is None or self.plan_version != map_version:
            return StepResult(STOP, "plan_stale")

        pts = self.plan.waypoints.points
        event = None
        while (
            self.waypoint_index < len(pts) - 1
            and math.hypot(
                pts[self.waypoint_index][0] - pose.x,
                pts[self.waypoint_index][1] - pose.y,
            )
            <= self.cfg.waypoint_reached_radius
        ):
            self.waypoint_index += 1
            event = "waypoint_advanced"
        cmd = select_command(
            grid, pose, pts[self.waypoint_index], self.prims, self.cfg, clearance_m
        )
        return StepResult(cmd, event)
