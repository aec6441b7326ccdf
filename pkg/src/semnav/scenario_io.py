"""Scenario files in, episode artifacts out.

Scenarios are JSON validated against the bundled schema; anything the schema
cannot say (bounds containment, label references, unit variants) is checked
here with error messages that name the offending field. The canonical
serialized form stores every angle in radians; hand-written files may use
the *_deg spellings instead, which parse once and never round-trip back.
"""

import copy
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import InvalidInput, ScenarioSyntaxError, ScenarioValidationError
from .global_map import Pose2D, SensorMount
from .global_planner import PlannerConfig
from .local_planner import LocalConfig
from .occupancy_grid import GridConfig, InflationParams, inflate, save_pgm
from .perception import DEFAULT_COLOR_THRESHOLD, ColorThresholdSegmenter, FilterConfig
from .render import render_overlay, save_overlay
from .simulator.episode import EpisodeConfig, EpisodeLog
from .simulator.sensor import SensorSpec
from .simulator.world import Agent, Category, Disc, Entity, Polygon, World

_SCHEMA = json.loads(
    resources.files("semnav.schemas").joinpath("scenario.schema.json").read_text()
)
_VALIDATOR = jsonschema.Draft7Validator(_SCHEMA)

_DEFAULT_HEIGHTS = {Category.STATIC: 2.0, Category.ITEM: 0.05, Category.ZONE: 0.0}
_DEFAULT_COLORS = {
    Category.STATIC: (110, 110, 110),
    Category.ITEM: (205, 125, 35),
    Category.ZONE: (220, 50, 47),
}
_CATEGORIES = {"static": Category.STATIC, "item": Category.ITEM, "zone": Category.ZONE}


@dataclass(frozen=True)
class SegmenterSpec:
    mode: str = "oracle"
    threshold: float = DEFAULT_COLOR_THRESHOLD
    colors: tuple = ()  # ((label, (r, g, b)), ...) sorted by label


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    bounds: tuple  # (xmin, ymin, xmax, ymax)
    start: Pose2D
    goals: tuple
    beware_list: frozenset
    grid: GridConfig
    inflation: InflationParams
    filter: FilterConfig
    planner: PlannerConfig
    local: LocalConfig
    sensor: SensorSpec
    episode: EpisodeConfig
    segmenter: SegmenterSpec
    world: World

    def make_segmenter(self):
        """None means the episode should trust the rendered oracle mask."""
        if self.segmenter.mode == "oracle":
            return None
        explicit = dict(self.segmenter.colors)
        colors = []
        for label in sorted(self.beware_list):
            if label in explicit:
                colors.append(explicit[label])
            else:
                colors.extend(
                    e.color for e in self.world.entities if e.label == label
                )
        return ColorThresholdSegmenter(tuple(colors), self.segmenter.threshold)


def _field_path(err) -> str:
    parts = []
    for p in err.absolute_path:
        if isinstance(p, int):
            parts.append(f"[{p}]")
        else:
            parts.append(("." if parts else "") + str(p))
    return "".join(parts) or "<root>"


def _loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioSyntaxError(
            f"line {e.lineno} column {e.colno}: {e.msg}"
        ) from None
    if not isinstance(doc, dict):
        raise ScenarioValidationError("<root>: scenario must be a JSON object")
    return doc


def _schema_check(doc: dict) -> None:
    errors = sorted(
        _VALIDATOR.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message)
    )
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ScenarioValidationError(f"{_field_path(err)}: {err.message}")


def _angle(section: dict, key: str, default: float, where: str) -> float:
    """Accept `key` (radians) or `key_deg` (degrees), never both."""
    has_rad = key in section
    has_deg = f"{key}_deg" in section
    if has_rad and has_deg:
        raise ScenarioValidationError(
            f"{where}.{key}: give either {key} or {key}_deg, not both"
        )
    if has_rad:
        return float(section[key])
    if has_deg:
        return math.radians(float(section[f"{key}_deg"]))
    return default


def _inside(x: float, y: float, bounds) -> bool:
    xmin, ymin, xmax, ymax = bounds
    return xmin <= x <= xmax and ymin <= y <= ymax


def _build_entity(spec: dict, index: int) -> Entity:
    where = f"entities[{index}]"
    category = _CATEGORIES[spec["category"]]
    kind = spec["kind"]
    if kind == "disc":
        if "center" not in spec or "radius" not in spec:
            raise ScenarioValidationError(f"{where}: disc needs center and radius")
        if "vertices" in spec:
            raise ScenarioValidationError(f"{where}: disc must not define vertices")
        shape = Disc(float(spec["center"][0]), float(spec["center"][1]), float(spec["radius"]))
    else:
        if "vertices" not in spec:
            raise ScenarioValidationError(f"{where}: polygon needs vertices")
        if "center" in spec or "radius" in spec:
            raise ScenarioValidationError(
                f"{where}: polygon must not define center or radius"
            )
        shape = Polygon(tuple((float(x), float(y)) for x, y in spec["vertices"]))
    height = float(spec.get("height", _DEFAULT_HEIGHTS[category]))
    color = tuple(spec.get("color", _DEFAULT_COLORS[category]))
    return Entity(shape, category, height, spec.get("label"), color)


def _parse_dict(doc: dict, name_fallback: str = "scenario") -> Scenario:
    _schema_check(doc)

    bounds = tuple(float(b) for b in doc["bounds"])
    xmin, ymin, xmax, ymax = bounds
    if not (xmin < xmax and ymin < ymax):
        raise ScenarioValidationError("bounds: min must be below max on both axes")

    sx, sy, stheta = (float(v) for v in doc["start"])
    if not _inside(sx, sy, bounds):
        raise ScenarioValidationError("start: outside world bounds")
    start = Pose2D(sx, sy, stheta)

    goals = []
    for i, g in enumerate(doc["goals"]):
        gx, gy = float(g[0]), float(g[1])
        if not _inside(gx, gy, bounds):
            raise ScenarioValidationError(f"goals[{i}]: outside world bounds")
        goals.append((gx, gy))

    try:
        grid = GridConfig(**doc.get("grid", {}))
        inflation = InflationParams(**doc.get("inflation", {}))
        filt = FilterConfig(**doc.get("filter", {}))
    except InvalidInput as e:
        raise ScenarioValidationError(str(e)) from None

    gp = dict(doc.get("global_planner", {}))
    theta_th = _angle(gp, "theta_th", math.radians(10.0), "global_planner")
    gp.pop("theta_th", None)
    gp.pop("theta_th_deg", None)
    sn = dict(doc.get("sensor", {}))
    h_fov = _angle(sn, "h_fov", math.radians(87.0), "sensor")
    v_fov = _angle(sn, "v_fov", math.radians(58.0), "sensor")
    pitch = _angle(sn, "mount_pitch", math.radians(-15.0), "sensor")
    mount = SensorMount(
        height=float(sn.get("mount_height", 0.6)),
        pitch=pitch,
        forward=float(sn.get("mount_forward", 0.0)),
    )
    for k in ("h_fov", "h_fov_deg", "v_fov", "v_fov_deg",
              "mount_pitch", "mount_pitch_deg", "mount_height", "mount_forward"):
        sn.pop(k, None)

    try:
        planner = PlannerConfig(theta_th=theta_th, **gp)
        local = LocalConfig(**doc.get("local_planner", {}))
        sensor = SensorSpec(mount=mount, h_fov=h_fov, v_fov=v_fov, **sn)
        episode = EpisodeConfig(**doc.get("episode", {}))
    except InvalidInput as e:
        raise ScenarioValidationError(str(e)) from None

    seg = doc.get("segmenter", {"mode": "oracle"})
    segmenter = SegmenterSpec(
        mode=seg["mode"],
        threshold=float(seg.get("threshold", DEFAULT_COLOR_THRESHOLD)),
        colors=tuple(
            sorted((k, tuple(v)) for k, v in seg.get("colors", {}).items())
        ),
    )

    entities = []
    for i, spec in enumerate(doc.get("entities", [])):
        try:
            entities.append(_build_entity(spec, i))
        except InvalidInput as e:
            raise ScenarioValidationError(f"entities[{i}]: {e}") from None

    agents = []
    for i, spec in enumerate(doc.get("agents", [])):
        loop = tuple((float(x), float(y)) for x, y in spec["loop"])
        for j, (lx, ly) in enumerate(loop):
            if not _inside(lx, ly, bounds):
                raise ScenarioValidationError(
                    f"agents[{i}].loop[{j}]: outside world bounds"
                )
        try:
            agents.append(
                Agent(
                    radius=float(spec.get("radius", 0.3)),
                    height=float(spec.get("height", 1.7)),
                    speed=float(spec.get("speed", 1.0)),
                    loop=loop,
                    phase=float(spec.get("phase", 0.0)),
                    color=tuple(spec.get("color", (80, 80, 200))),
                )
            )
        except InvalidInput as e:
            raise ScenarioValidationError(f"agents[{i}]: {e}") from None

    labels = {e.label for e in entities if e.label is not None}
    beware = []
    for i, label in enumerate(doc.get("beware_list", [])):
        if label not in labels:
            raise ScenarioValidationError(
                f"beware_list[{i}]: no entity carries class '{label}'"
            )
        beware.append(label)

    world = World((xmin, xmax, ymin, ymax), entities, agents)
    return Scenario(
        name=str(doc.get("name", name_fallback)),
        seed=int(doc.get("seed", 0)),
        bounds=bounds,
        start=start,
        goals=tuple(goals),
        beware_list=frozenset(beware),
        grid=grid,
        inflation=inflation,
        filter=filt,
        planner=planner,
        local=local,
        sensor=sensor,
        episode=episode,
        segmenter=segmenter,
        world=world,
    )


def parse_scenario(text: str) -> Scenario:
    return _parse_dict(_loads(text))


_SEGMENT = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)((?:\[\d+\])*)$")


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply key=value pairs with dotted paths, e.g. local_planner.v_max=0.5.

    Values parse as JSON when possible, else as bare strings. List elements
    address as name[i]. The result still goes through full validation, so a
    misspelled key fails the schema's unknown-key rule.
    """
    out = copy.deepcopy(doc)
    for item in overrides:
        key, eq, raw = item.partition("=")
        if not eq:
            raise ScenarioValidationError(f"override '{item}': expected key=value")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        segments = key.strip().split(".")
        for si, segment in enumerate(segments):
            m = _SEGMENT.match(segment)
            if not m:
                raise ScenarioValidationError(
                    f"override '{item}': bad path segment '{segment}'"
                )
            name = m.group(1)
            indices = [int(n) for n in re.findall(r"\[(\d+)\]", m.group(2))]
            last = si == len(segments) - 1
            if last and not indices:
                node[name] = value
                break
            if name not in node:
                if indices:
                    raise ScenarioValidationError(
                        f"override '{item}': '{name}' is not a list in the scenario"
                    )
                node[name] = {}
            node = node[name]
            for ii, idx in enumerate(indices):
                if not isinstance(node, list) or idx >= len(node):
                    raise ScenarioValidationError(
                        f"override '{item}': index {idx} out of range for '{name}'"
                    )
                if last and ii == len(indices) - 1:
                    node[idx] = value
                else:
                    node = node[idx]
    return out


def load_scenario(path, overrides=(), seed=None) -> Scenario:
    p = Path(path)
    doc = _loads(p.read_text())
    if overrides:
        doc = apply_overrides(doc, overrides)
    if seed is not None:
        doc["seed"] = int(seed)
    return _parse_dict(doc, name_fallback=p.stem)


def _entity_doc(e: Entity) -> dict:
    doc = {"kind": "disc" if isinstance(e.shape, Disc) else "polygon"}
    doc["category"] = e.category.name.lower()
    if isinstance(e.shape, Disc):
        doc["center"] = [e.shape.cx, e.shape.cy]
        doc["radius"] = e.shape.radius
    else:
        doc["vertices"] = [list(v) for v in e.shape.vertices]
    doc["height"] = e.height
    if e.label is not None:
        doc["label"] = e.label
    doc["color"] = list(e.color)
    return doc


def serialize_scenario(sc: Scenario) -> str:
    """Emit the canonical JSON form (radians, all sections explicit)."""
    xmin, ymin, xmax, ymax = sc.bounds
    doc = {
        "schema_version": 1,
        "name": sc.name,
        "seed": sc.seed,
        "bounds": [xmin, ymin, xmax, ymax],
        "start": [sc.start.x, sc.start.y, sc.start.theta],
        "goals": [list(g) for g in sc.goals],
        "beware_list": sorted(sc.beware_list),
        "grid": {
            "resolution": sc.grid.resolution,
            "width": sc.grid.width,
            "height": sc.grid.height,
        },
        "inflation": {
            "vehicle_width": sc.inflation.vehicle_width,
            "safety_margin": sc.inflation.safety_margin,
        },
        "filter": {
            "ground_max_z": sc.filter.ground_max_z,
            "ceiling_min_z": sc.filter.ceiling_min_z,
            "obstacle_min_height": sc.filter.obstacle_min_height,
        },
        "global_planner": {
            "theta_th": sc.planner.theta_th,
            "heuristic_weight": sc.planner.heuristic_weight,
            "max_expansions": sc.planner.max_expansions,
            "snap_radius": sc.planner.snap_radius,
            "waypoint_spacing": sc.planner.waypoint_spacing,
        },
        "local_planner": {
            "v_max": sc.local.v_max,
            "omega_max": sc.local.omega_max,
            "v_min": sc.local.v_min,
            "n_speeds": sc.local.n_speeds,
            "n_turn_rates": sc.local.n_turn_rates,
            "horizon": sc.local.horizon,
            "dt": sc.local.dt,
            "waypoint_reached_radius": sc.local.waypoint_reached_radius,
            "goal_reached_radius": sc.local.goal_reached_radius,
            "w_dist": sc.local.w_dist,
            "w_heading": sc.local.w_heading,
            "w_clearance": sc.local.w_clearance,
            "clearance_cap": sc.local.clearance_cap,
        },
        "sensor": {
            "width": sc.sensor.width,
            "height": sc.sensor.height,
            "h_fov": sc.sensor.h_fov,
            "v_fov": sc.sensor.v_fov,
            "depth_min": sc.sensor.depth_min,
            "depth_max": sc.sensor.depth_max,
            "mount_height": sc.sensor.mount.height,
            "mount_pitch": sc.sensor.mount.pitch,
            "mount_forward": sc.sensor.mount.forward,
        },
        "episode": {
            "control_dt": sc.episode.control_dt,
            "sensor_period": sc.episode.sensor_period,
            "max_sim_time": sc.episode.max_sim_time,
            "replan_fail_limit": sc.episode.replan_fail_limit,
            "sigma_v": sc.episode.sigma_v,
            "sigma_omega": sc.episode.sigma_omega,
            "seg_flip_prob": sc.episode.seg_flip_prob,
            "carve_row_stride": sc.episode.carve_row_stride,
        },
        "segmenter": {
            "mode": sc.segmenter.mode,
            "threshold": sc.segmenter.threshold,
            "colors": {k: list(v) for k, v in sc.segmenter.colors},
        },
        "entities": [_entity_doc(e) for e in sc.world.entities],
        "agents": [
            {
                "radius": a.radius,
                "height": a.height,
                "speed": a.speed,
                "loop": [list(p) for p in a.loop],
                "phase": a.phase,
                "color": list(a.color),
            }
            for a in sc.world.agents
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


# -- episode artifact writers -------------------------------------------


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def write_outputs(log: EpisodeLog, outdir) -> list:
    """Emit trajectory.csv, commands.csv, metrics.csv, summary.json and,
    when the log carries a final map, map.pgm plus overlay.ppm."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "trajectory.csv"
    _write_csv(
        path,
        "t,x,y,theta,plan_id",
        (
            f"{t:.6f},{x:.6f},{y:.6f},{th:.6f},{pid}"
            for t, (x, y, th), pid in zip(log.times, log.poses, log.plan_ids)
        ),
    )
    written.append(path)

    path = out / "commands.csv"
    _write_csv(
        path,
        "t,v,omega",
        (
            f"{log.times[k]:.6f},{v:.6f},{w:.6f}"
            for k, (v, w) in enumerate(log.commands)
        ),
    )
    written.append(path)

    path = out / "metrics.csv"
    _write_csv(
        path,
        "t,explored_area_m2,distance_m",
        (
            f"{t:.6f},{a:.6f},{d:.6f}"
            for t, a, d in zip(log.times, log.explored_m2, log.distance_m)
        ),
    )
    written.append(path)

    def _finite(x):
        return None if math.isinf(x) else x

    summary = {
        "schema_version": 1,
        "scenario": getattr(log.scenario, "name", None),
        "seed": getattr(log.scenario, "seed", None),
        "outcome": log.outcome,
        "goals_reached": log.goals_reached,
        "distance_m": log.distance_m[-1] if log.distance_m else 0.0,
        "sim_time_s": log.sim_time_s,
        "wall_time_s": log.wall_time_s,
        "min_clearance_m": _finite(log.min_clearance_m),
        "min_path_clearance_m": _finite(log.min_path_clearance_m),
        "hazard_violations": log.hazard_ticks,
        "hazard_entries": sum(1 for _, kind, _ in log.events if kind == "hazard_entered"),
        "collisions": log.collisions,
        "replans": log.replans,
        "explored_area_m2": log.explored_m2[-1] if log.explored_m2 else 0.0,
        "events": [
            {"t": t, "kind": kind, "detail": detail} for t, kind, detail in log.events
        ],
    }
    path = out / "summary.json"
    path.write_text(json.dumps(summary, indent=2) + "\n")
    written.append(path)

    if log.final_raw is not None:
        path = out / "map.pgm"
        save_pgm(log.final_raw, path)
        written.append(path)

        sc = log.scenario
        inflated = (
            inflate(log.final_raw, sc.inflation) if sc is not None else None
        )
        img = render_overlay(
            log.final_raw,
            semantic=log.final_semantic,
            inflated=inflated,
            plan=log.last_plan,
            trajectory_xy=np.array([(p[0], p[1]) for p in log.poses])
            if log.poses
            else None,
            start_xy=(sc.start.x, sc.start.y) if sc is not None else None,
            goals_xy=sc.goals if sc is not None else (),
        )
        path = out / "overlay.ppm"
        save_overlay(path, img)
        written.append(path)

    return written
