"""Episode scoring helpers shared by the runner, the writers and the tests."""

import numpy as np

from .errors import InternalError, InvalidInput
from .occupancy_grid import OccupancyGrid, clearance_field_m, world_to_pixel_array


def explored_area(observed_masks, resolution: float) -> np.ndarray:
    """Turn a sequence of boolean observed masks into m^2 coverage values.

    Coverage can only grow while an episode runs, so a drop between
    consecutive masks means the caller corrupted its bookkeeping.
    """
    if resolution <= 0:
        raise InvalidInput("resolution must be positive")
    counts = np.array([int(np.count_nonzero(m)) for m in observed_masks], dtype=np.int64)
    if np.any(np.diff(counts) < 0):
        raise InternalError("observed cell count decreased between frames")
    return counts * float(resolution) ** 2


def path_length(poses) -> float:
    """Sum of straight-line segment lengths along (x, y, ...) rows."""
    pts = np.asarray(poses, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InvalidInput("poses must be a non-empty (N, >=2) array")
    if pts.shape[0] == 1:
        return 0.0
    deltas = np.diff(pts[:, :2], axis=0)
    return float(np.hypot(deltas[:, 0], deltas[:, 1]).sum())


def min_clearance(trajectory_xy, grid: OccupancyGrid) -> float:
    """Smallest obstacle distance (m) over the trajectory, against raw cells.

    Returns +inf when the grid holds no occupied cells at all. Poses that
    fall outside the grid extent are ignored; if none are inside the
    trajectory cannot be scored.
    """
    pts = np.asarray(trajectory_xy, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InvalidInput("trajectory must be a non-empty (N, 2) array")
    u, v, ok = world_to_pixel_array(pts[:, :2], grid.config)
    if not ok.any():
        raise InvalidInput("no trajectory pose falls inside the grid")
    field = clearance_field_m(grid)
    return float(field[v[ok], u[ok]].min())


def hazard_violations(trajectory_xy, world, robot_radius: float) -> int:
    """Count trajectory rows where the robot disc touches any item or zone.

    Grounded in entity geometry, not grid cells, so the count does not move
    with grid resolution and ignores whatever the beware list said.
    """
    from .simulator.world import check_hazard

    pts = np.asarray(trajectory_xy, dtype=np.float64)
    if pts.ndim != 2:
        raise InvalidInput("trajectory must be an (N, 2) array")
    return sum(
        1 for x, y in pts[:, :2] if check_hazard(world, float(x), float(y), robot_radius)
    )
