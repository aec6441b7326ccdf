"""Semantic-aware online navigation: mapping, planning and a 2.5D simulator.

The pipeline turns RGB-D frames plus a user "beware list" of hazard classes
into an occupancy grid that mixes geometric obstacles with semantic no-go
regions, plans over it with A*, and follows the plan with motion primitives.
"""

from importlib.metadata import PackageNotFoundError, version

from .errors import (
    ExpansionBudgetExceeded,
    GoalUnreachable,
    InternalError,
    InvalidInput,
    NoPath,
    OutOfBounds,
    PlanningError,
    ScenarioSyntaxError,
    ScenarioValidationError,
    SemnavError,
)
from .global_map import GlobalMap, Pose2D, SensorMount, pose_id, transform_to_world
from .global_planner import PlannerConfig, PlanResult, astar, plan, refine_waypoints
from .local_planner import (
    LocalConfig,
    MissionTracker,
    VelocityCommand,
    generate_primitives,
    select_command,
)
from .occupancy_grid import (
    FREE,
    OCCUPIED,
    GridConfig,
    InflationParams,
    OccupancyGrid,
    inflate,
    rasterize,
)
from .perception import (
    GEOMETRIC,
    SEMANTIC,
    CameraIntrinsics,
    ColorFrame,
    ColorThresholdSegmenter,
    DepthFrame,
    FilterConfig,
    PointCloud,
    SemanticMask,
    apply_mask,
    back_project,
    filter_geometric,
)
from .scenario_io import (
    Scenario,
    load_scenario,
    parse_scenario,
    serialize_scenario,
    write_outputs,
)
from .simulator import (
    Agent,
    Camera,
    Disc,
    Entity,
    EpisodeConfig,
    EpisodeLog,
    Polygon,
    SensorSpec,
    World,
    run_episode,
    sense,
    step_robot,
)

try:
    __version__ = version("semnav")
except PackageNotFoundError:
    __version__ = "0.0.0"

__all__ = [
    "Agent",
    "Camera",
    "CameraIntrinsics",
    "ColorFrame",
    "ColorThresholdSegmenter",
    "DepthFrame",
    "Disc",
    "Entity",
    "EpisodeConfig",
    "EpisodeLog",
    "ExpansionBudgetExceeded",
    "FREE",
    "FilterConfig",
    "GEOMETRIC",
    "GlobalMap",
    "GoalUnreachable",
    "GridConfig",
    "InflationParams",
    "InternalError",
    "InvalidInput",
    "LocalConfig",
    "MissionTracker",
    "NoPath",
    "OCCUPIED",
    "OccupancyGrid",
    "OutOfBounds",
    "PlanResult",
    "PlannerConfig",
    "PlanningError",
    "PointCloud",
    "Polygon",
    "Pose2D",
    "SEMANTIC",
    "Scenario",
    "ScenarioSyntaxError",
    "ScenarioValidationError",
    "SemanticMask",
    "SemnavError",
    "SensorMount",
    "SensorSpec",
    "VelocityCommand",
    "World",
    "apply_mask",
    "astar",
    "back_project",
    "filter_geometric",
    "generate_primitives",
    "inflate",
    "load_scenario",
    "parse_scenario",
    "plan",
    "pose_id",
    "rasterize",
    "refine_waypoints",
    "run_episode",
    "select_command",
    "sense",
    "serialize_scenario",
    "step_robot",
    "transform_to_world",
    "write_outputs",
]
