"""Center-origin occupancy grid: rasterization, inflation, PGM export.

Cells hold 0 (free or simply never observed) or 255 (occupied). Planning
treats unknown space as free on purpose; obstacles assert themselves as the
robot actually sees them.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from . import image_io
from .errors import InvalidInput, OutOfBounds
from .geometry import ceil_index, floor_index, floor_index_array
from .perception import PointCloud

FREE = 0
OCCUPIED = 255


@dataclass(frozen=True)
class GridConfig:
    """Grid geometry. The world origin sits at the grid center."""

    resolution: float = 0.05
    width: int = 1200
    height: int = 1200

    def __post_init__(self):
        if self.resolution <= 0:
            raise InvalidInput("resolution must be positive")
        if self.width <= 0 or self.height <= 0:
            raise InvalidInput("grid dimensions must be positive")
        if self.width % 2 or self.height % 2:
            raise InvalidInput("grid dimensions must be even")

    @property
    def x_extent(self):
        half = self.width // 2 * self.resolution
        return (-half, half)

    @property
    def y_extent(self):
        half = self.height // 2 * self.resolution
        return (-half, half)


@dataclass(frozen=True)
class InflationParams:
    vehicle_width: float = 0.7
    safety_margin: float = 0.1

    def __post_init__(self):
        if self.vehicle_width <= 0 or self.safety_margin < 0:
            raise InvalidInput("bad inflation parameters")


@dataclass(frozen=True)
class OccupancyGrid:
    """cells is (height, width) uint8, indexed [v, u]. Treat as immutable."""

    cells: np.ndarray
    config: GridConfig
    inflated: bool = False
    inflation_radius: int = 0

    def __post_init__(self):
        if self.cells.dtype != np.uint8:
            raise InvalidInput("cells must be uint8")
        if self.cells.shape != (self.config.height, self.config.width):
            raise InvalidInput(
                f"cells shape {self.cells.shape} does not match config "
                f"({self.config.height}, {self.config.width})"
            )

    @staticmethod
    def empty(config: GridConfig) -> "OccupancyGrid":
        return OccupancyGrid(
            np.zeros((config.height, config.width), dtype=np.uint8), config
        )

    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.cells))


def world_to_pixel(x: float, y: float, cfg: GridConfig):
    """World meters to integer cell (u, v). Raises OutOfBounds off-grid."""
    u = floor_index(x, cfg.resolution) + cfg.width // 2
    v = floor_index(y, cfg.resolution) + cfg.height // 2
    if not (0 <= u < cfg.width and 0 <= v < cfg.height):
        raise OutOfBounds(f"({x}, {y}) falls outside the {cfg.width}x{cfg.height} grid")
    return u, v


def pixel_to_world(u: int, v: int, cfg: GridConfig):
    """Cell (u, v) to the world coordinates of its center."""
    x = (u - cfg.width // 2 + 0.5) * cfg.resolution
    y = (v - cfg.height // 2 + 0.5) * cfg.resolution
    return x, y


def world_to_pixel_array(xy, cfg: GridConfig):
    """Vectorized conversion. Returns (u, v, in_bounds) without raising."""
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    u = floor_index_array(xy[:, 0], cfg.resolution) + cfg.width // 2
    v = floor_index_array(xy[:, 1], cfg.resolution) + cfg.height // 2
    ok = (u >= 0) & (u < cfg.width) & (v >= 0) & (v < cfg.height)
    return u, v, ok


def rasterize(cloud: PointCloud, cfg: GridConfig) -> OccupancyGrid:
    """Mark the cell under every point. Out-of-grid points are dropped.

    Marking is idempotent, so the result does not depend on point order.
    """
    cells = np.zeros((cfg.height, cfg.width), dtype=np.uint8)
    if len(cloud):
        u, v, ok = world_to_pixel_array(cloud.points[:, :2], cfg)
        cells[v[ok], u[ok]] = OCCUPIED
    return OccupancyGrid(cells, cfg)


def inflation_radius_cells(params: InflationParams, resolution: float) -> int:
    """Inflation radius in cells: ceil((w/2 + margin) / resolution)."""
    return ceil_index(params.vehicle_width / 2.0 + params.safety_margin, resolution)


def dilate_occupancy(occupied: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation by the disc {(du, dv): du^2 + dv^2 <= radius^2}.

    Uses the exact Euclidean feature transform and compares squared integer
    distances, so the result is bit-for-bit the brute-force disc dilation.
    """
    if radius < 0:
        raise InvalidInput("radius must be non-negative")
    if not occupied.any():
        return occupied.copy()
    # Indices of the nearest occupied cell for every cell.
    nearest = ndimage.distance_transform_edt(
        ~occupied, return_distances=False, return_indices=True
    )
    vv, uu = np.indices(occupied.shape)
    d2 = (nearest[0] - vv).astype(np.int64) ** 2 + (nearest[1] - uu).astype(
        np.int64
    ) ** 2
    return d2 <= radius * radius


def inflate(grid: OccupancyGrid, params: InflationParams) -> OccupancyGrid:
    """Grow every occupied cell by the vehicle half-width plus margin."""
    if grid.inflated:
        raise InvalidInput("grid is already inflated")
    radius = inflation_radius_cells(params, grid.config.resolution)
    grown = dilate_occupancy(grid.cells != FREE, radius)
    return OccupancyGrid(
        grown.astype(np.uint8) * OCCUPIED,
        grid.config,
        inflated=True,
        inflation_radius=radius,
    )


def clearance_field_m(grid: OccupancyGrid) -> np.ndarray:
    """Euclidean distance (meters) from each cell to the nearest occupied cell.

    An empty grid yields +inf everywhere.
    """
    occ = grid.cells != FREE
    if not occ.any():
        return np.full(grid.cells.shape, np.inf)
    return ndimage.distance_transform_edt(~occ) * grid.config.resolution


def save_pgm(grid: OccupancyGrid, path) -> None:
    image_io.write_pgm(path, grid.cells)


def load_pgm(path, resolution: float) -> OccupancyGrid:
    """Read a grid PGM back. Cells must be strictly 0 or 255."""
    data = image_io.read_pgm(path)
    if data.dtype != np.uint8:
        raise InvalidInput("grid PGM must be 8-bit")
    if not np.isin(data, (FREE, OCCUPIED)).all():
        raise InvalidInput("grid PGM must contain only 0 and 255")
    h, w = data.shape
    return OccupancyGrid(data, GridConfig(resolution, w, h))


def with_flag(grid: OccupancyGrid, inflated: bool, radius: int = 0) -> OccupancyGrid:
    """Relabel a grid's inflated flag without touching its cells."""
    return replace(grid, inflated=inflated, inflation_radius=radius)
