import numpy as np
import pytest

from semnav.occupancy_grid import FREE, OCCUPIED, GridConfig, OccupancyGrid


def grid_from_art(art, resolution=1.0):
    """Build an OccupancyGrid from ASCII art ('#' occupied, '.' free).

    Row 0 of the art is the TOP of the grid (highest v index), matching how
    the picture reads on screen. Width/height are padded to stay even.
    """
    rows = [r.strip() for r in art.strip().splitlines()]
    h = len(rows)
    w = len(rows[0])
    assert all(len(r) == w for r in rows), "ragged art"
    if w % 2 or h % 2:
        raise ValueError("art dimensions must be even")
    cells = np.full((h, w), FREE, dtype=np.uint8)
    for vi, row in enumerate(rows):
        for u, ch in enumerate(row):
            if ch == "#":
                cells[h - 1 - vi, u] = OCCUPIED
    return OccupancyGrid(cells, GridConfig(resolution, w, h))


def empty_grid(width=32, height=32, resolution=0.1):
    cells = np.full((height, width), FREE, dtype=np.uint8)
    return OccupancyGrid(cells, GridConfig(resolution, width, height))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
