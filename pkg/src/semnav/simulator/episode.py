"""Closed-loop episode runner: sense, map, replan, drive, repeat.

The loop is strictly sequential and deterministic for a fixed seed: commands
issued at tick t depend only on sensor data gathered at ticks <= t, agents
and the robot advance with the same integrator every run, and the only
randomness comes from one seeded generator (actuation noise, mask flips).
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import metrics as metrics_mod
from ..errors import InvalidInput, PlanningError
from ..global_map import GlobalMap, Pose2D, transform_to_world
from ..global_planner import plan as plan_global
from ..local_planner import STOP, MissionTracker, VelocityCommand, generate_primitives
from ..occupancy_grid import (
    OccupancyGrid,
    clearance_field_m,
    inflate,
    rasterize,
    world_to_pixel_array,
)
from ..perception import (
    GEOMETRIC,
    SEMANTIC,
    PointCloud,
    SemanticMask,
    apply_mask,
    back_project,
    filter_geometric,
)
from .sensor import Camera
from .world import check_collision, check_hazard, step_agents


@dataclass(frozen=True)
class EpisodeConfig:
    control_dt: float = 0.1
    sensor_period: float = 0.5
    max_sim_time: float = 300.0
    replan_fail_limit: int = 20
    sigma_v: float = 0.0
    sigma_omega: float = 0.0
    seg_flip_prob: float = 0.0
    carve_row_stride: int = 4
    record_path_clearance: bool = True

    def __post_init__(self):
        if self.control_dt <= 0 or self.sensor_period < self.control_dt:
            raise InvalidInput("need control_dt > 0 and sensor_period >= control_dt")
        if self.max_sim_time <= 0:
            raise InvalidInput("max_sim_time must be positive")


@dataclass
class EpisodeLog:
    """Everything an episode produced, ready for the output writers."""

    times: list = field(default_factory=list)
    poses: list = field(default_factory=list)  # (x, y, theta) per time row
    commands: list = field(default_factory=list)  # one fewer than poses
    plan_ids: list = field(default_factory=list)
    events: list = field(default_factory=list)  # (t, kind, detail)
    explored_m2: list = field(default_factory=list)
    distance_m: list = field(default_factory=list)
    outcome: str = "none"
    collisions: int = 0
    hazard_ticks: int = 0
    goals_reached: int = 0
    replans: int = 0
    min_clearance_m: float = math.inf
    min_path_clearance_m: float = math.inf
    sim_time_s: float = 0.0
    wall_time_s: float = 0.0
    final_raw: OccupancyGrid | None = None
    final_semantic: OccupancyGrid | None = None
    last_plan: object = None
    scenario: object = None


def step_robot(
    pose: Pose2D, cmd: VelocityCommand, dt: float, v_exec=None, omega_exec=None
) -> Pose2D:
    """Integrate unicycle motion exactly over one tick.

    v_exec/omega_exec override the commanded twist (used for actuation
    noise); by default the command executes perfectly.
    """
    v = cmd.v if v_exec is None else v_exec
    w = cmd.omega if omega_exec is None else omega_exec
    if abs(w) < 1e-12:
        return Pose2D(
            pose.x + v * math.cos(pose.theta) * dt,
            pose.y + v * math.sin(pose.theta) * dt,
            pose.theta,
        )
    t2 = pose.theta + w * dt
    return Pose2D(
        pose.x + (v / w) * (math.sin(t2) - math.sin(pose.theta)),
        pose.y - (v / w) * (math.cos(t2) - math.cos(pose.theta)),
        t2,
    )


class Simulation:
    """Owns the mutable episode state; one run() per instance."""

    def __init__(self, scenario, frame_writer=None):
        self.scenario = scenario
        self.cfg: EpisodeConfig = scenario.episode
        self.world = scenario.world
        self.world.reset_agents()
        self.camera = Camera(scenario.sensor)
        self.rng = np.random.Generator(np.random.PCG64(scenario.seed))
        self.gmap = GlobalMap()
        self.grid_cfg = scenario.grid
        self.robot_radius = scenario.inflation.vehicle_width / 2.0
        self.frame_writer = frame_writer
        self.observed = np.zeros(
            (self.grid_cfg.height, self.grid_cfg.width), dtype=bool
        )
        self.raw = OccupancyGrid.empty(self.grid_cfg)
        self.inflated = inflate(self.raw, scenario.inflation)
        self.clearance = clearance_field_m(self.inflated)
        self.version = 0
        self.segmenter = scenario.make_segmenter()

    # -- sensing ---------------------------------------------------------

    def _sense_and_map(self, pose: Pose2D, tick: int) -> None:
        beware = self.scenario.beware_list
        result = self.camera.sense(self.world, pose, beware)
        if self.segmenter is None:
            mask = result.mask
        else:
            mask = self.segmenter.segment(result.rgb, result.depth)
        if self.cfg.seg_flip_prob > 0.0:
            flips = self.rng.random(mask.data.shape) < self.cfg.seg_flip_prob
            mask = SemanticMask(
                np.where(flips, 1 - mask.data, mask.data).astype(np.uint8),
                mask.class_id,
            )
        if self.frame_writer is not None:
            self.frame_writer(tick, result.depth, mask)

        mount = self.scenario.sensor.mount
        geo = transform_to_world(
            back_project(result.depth, GEOMETRIC), pose, mount
        )
        sem = transform_to_world(
            back_project(apply_mask(result.depth, mask), SEMANTIC), pose, mount
        )
        fused = PointCloud.concatenate(
            [filter_geometric(geo, self.scenario.filter), sem]
        )
        self.gmap.upsert_scan(pose, fused)

        self.raw = rasterize(self.gmap.merged_cloud(), self.grid_cfg)
        self.inflated = inflate(self.raw, self.scenario.inflation)
        self.clearance = clearance_field_m(self.inflated)
        self.version += 1

        self._mark_observed(pose, fused, result.hit_z)

    def _mark_observed(self, pose: Pose2D, scan: PointCloud, hit_z) -> None:
        if len(scan):
            u, v, ok = world_to_pixel_array(scan.points[:, :2], self.grid_cfg)
            self.observed[v[ok], u[ok]] = True
        origin, dirs = self.camera.rays(pose)
        spec = self.camera.spec
        rows = np.arange(0, spec.height, max(1, self.cfg.carve_row_stride))
        sel = (rows[:, None] * spec.width + np.arange(spec.width)).ravel()
        d = dirs[sel]
        dz = d[:, 2]
        with np.errstate(divide="ignore"):
            t_ground = np.where(dz < -1e-12, -origin[2] / dz, np.inf)
        z_stop = np.minimum(np.minimum(hit_z[sel], t_ground), spec.depth_max)
        z_stop = np.clip(z_stop, 0.0, None)
        length = z_stop * np.hypot(d[:, 0], d[:, 1])
        res = self.grid_cfg.resolution
        n_samples = int(np.ceil(max(float(length.max()), res) / res))
        n_samples = max(1, min(n_samples, 4096))
        frac = (np.arange(n_samples) + 1.0) / n_samples
        zz = z_stop[:, None] * frac[None, :]
        px = origin[0] + d[:, 0][:, None] * zz
        py = origin[1] + d[:, 1][:, None] * zz
        u, v, ok = world_to_pixel_array(
            np.column_stack([px.ravel(), py.ravel()]), self.grid_cfg
        )
        self.observed[v[ok], u[ok]] = True

    # -- planning --------------------------------------------------------

    def _try_replan(self, tracker: MissionTracker, pose: Pose2D, log: EpisodeLog):
        goal = tracker.current_goal
        if goal is None:
            return True
        try:
            result = plan_global(self.inflated, pose, goal, self.scenario.planner)
        except PlanningError:
            if tracker.plan is not None:
                # Keep driving the previous plan; primitives still collision
                # check against the fresh grid.
                tracker.plan_version = self.version
            return False
        tracker.set_plan(result, self.version, pose)
        log.last_plan = result
        log.replans += 1
        if self.cfg.record_path_clearance and len(result.path.cells) > 1:
            raw_clear = clearance_field_m(self.raw)
            cells = np.array(result.path.cells)
            values = raw_clear[cells[:, 1], cells[:, 0]]
            log.min_path_clearance_m = min(
                log.min_path_clearance_m, float(values.min())
            )
        return True

    # -- main loop -------------------------------------------------------

    def run(self) -> EpisodeLog:
        t_start = time.perf_counter()
        sc = self.scenario
        cfg = self.cfg
        log = EpisodeLog(scenario=sc)
        dt = cfg.control_dt
        sensor_every = max(1, round(cfg.sensor_period / dt))
        max_ticks = int(round(cfg.max_sim_time / dt))

        pose = sc.start
        tracker = MissionTracker(
            sc.goals, sc.local, generate_primitives(sc.local)
        )
        distance = 0.0
        fails = 0
        in_hazard = False

        def res_area():
            return float(np.count_nonzero(self.observed)) * self.grid_cfg.resolution**2

        def append_row(t):
            log.times.append(t)
            log.poses.append((pose.x, pose.y, pose.theta))
            log.plan_ids.append(log.replans)
            log.explored_m2.append(res_area())
            log.distance_m.append(distance)

        tick = 0
        while tick < max_ticks:
            t = tick * dt
            if tick % sensor_every == 0:
                self._sense_and_map(pose, tick)
                if self._try_replan(tracker, pose, log):
                    fails = 0
                else:
                    fails += 1
                if fails >= cfg.replan_fail_limit:
                    log.outcome = "unreachable"
                    log.events.append((t, "unreachable", None))
                    append_row(t)
                    break

            step = tracker.step(pose, self.inflated, self.version, self.clearance)
            cmd = step.command
            if step.event == "goal_reached":
                log.goals_reached += 1
                log.events.append((t, "goal_reached", step.goal_index))
                if tracker.mission_complete:
                    log.outcome = "success"
                    append_row(t)
                    break
                if self._try_replan(tracker, pose, log):
                    fails = 0
                else:
                    fails += 1
                cmd = STOP
            elif step.event == "plan_stale":
                if self._try_replan(tracker, pose, log):
                    fails = 0
                else:
                    fails += 1
                if fails >= cfg.replan_fail_limit:
                    log.outcome = "unreachable"
                    log.events.append((t, "unreachable", None))
                    append_row(t)
                    break
                cmd = STOP

            append_row(t)
            log.commands.append((cmd.v, cmd.omega))

            v_exec = cmd.v
            w_exec = cmd.omega
            if cfg.sigma_v > 0.0:
                v_exec += float(self.rng.normal(0.0, cfg.sigma_v))
            if cfg.sigma_omega > 0.0:
                w_exec += float(self.rng.normal(0.0, cfg.sigma_omega))
            new_pose = step_robot(pose, cmd, dt, v_exec, w_exec)
            distance += math.hypot(new_pose.x - pose.x, new_pose.y - pose.y)
            pose = new_pose
            step_agents(self.world, dt)
            t_next = (tick + 1) * dt

            if check_collision(self.world, pose.x, pose.y, self.robot_radius):
                log.collisions += 1
                log.events.append((t_next, "collision", None))
                log.outcome = "collision"
                append_row(t_next)
                break

            hazard_now = check_hazard(self.world, pose.x, pose.y, self.robot_radius)
            if hazard_now:
                log.hazard_ticks += 1
                if not in_hazard:
                    log.events.append((t_next, "hazard_entered", None))
            in_hazard = hazard_now

            tick += 1
            if tick >= max_ticks:
                log.outcome = "timeout"
                append_row(t_next)
                break
        else:
            if log.outcome == "none":
                log.outcome = "timeout"

        log.sim_time_s = log.times[-1] if log.times else 0.0
        log.final_raw = self.raw
        merged = self.gmap.merged_cloud()
        log.final_semantic = rasterize(
            merged.select(merged.provenance == SEMANTIC), self.grid_cfg
        )
        if log.poses:
            xy = np.array([(p[0], p[1]) for p in log.poses])
            log.min_clearance_m = metrics_mod.min_clearance(xy, self.raw)
        log.wall_time_s = time.perf_counter() - t_start
        return log


def run_episode(scenario, frame_writer=None) -> EpisodeLog:
    """Run one scenario to termination and return its log."""
    return Simulation(scenario, frame_writer).run()
