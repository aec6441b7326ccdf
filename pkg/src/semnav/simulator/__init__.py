from .episode import EpisodeConfig, EpisodeLog, Simulation, run_episode, step_robot
from .sensor import Camera, SenseResult, SensorSpec, camera_basis, sense
from .world import (
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

__all__ = [
    "Agent",
    "Camera",
    "Category",
    "Disc",
    "Entity",
    "EpisodeConfig",
    "EpisodeLog",
    "Polygon",
    "SenseResult",
    "SensorSpec",
    "Simulation",
    "World",
    "camera_basis",
    "check_collision",
    "check_hazard",
    "inside_zone",
    "run_episode",
    "sense",
    "step_agents",
    "step_robot",
]
