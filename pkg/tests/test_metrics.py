import numpy as np
import pytest

from semnav.errors import InternalError, InvalidInput
from semnav.metrics import explored_area, hazard_violations, min_clearance, path_length
from semnav.occupancy_grid import OCCUPIED
from semnav.simulator.world import Category, Disc, Entity, World

from conftest import empty_grid, grid_from_art


def test_explored_area_scales_with_resolution():
    masks = [
        np.zeros((4, 4), dtype=bool),
        np.eye(4, dtype=bool),
        np.ones((4, 4), dtype=bool),
    ]
    np.testing.assert_allclose(explored_area(masks, 0.5), [0.0, 1.0, 4.0])
    np.testing.assert_allclose(explored_area(masks, 2.0), [0.0, 16.0, 64.0])


def test_explored_area_rejects_shrinking_coverage():
    masks = [np.ones((2, 2), dtype=bool), np.zeros((2, 2), dtype=bool)]
    with pytest.raises(InternalError):
        explored_area(masks, 0.1)
    with pytest.raises(InvalidInput):
        explored_area(masks[:1], 0.0)


def test_path_length_simple_shapes():
    square = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]
    assert np.isclose(path_length(square), 4.0)
    assert path_length([(3.0, -2.0)]) == 0.0
    diag = [(0.0, 0.0, 0.3), (3.0, 4.0, 1.2)]  # extra pose columns ignored
    assert np.isclose(path_length(diag), 5.0)
    with pytest.raises(InvalidInput):
        path_length(np.empty((0, 2)))


def test_min_clearance_against_single_cell(rng):
    grid = grid_from_art(
        """
        ......
        ......
        ..#...
        ......
        ......
        ......
        """,
        resolution=0.5,
    )
    v, u = np.nonzero(grid.cells)
    from semnav.occupancy_grid import pixel_to_world

    ox, oy = pixel_to_world(int(u[0]), int(v[0]), grid.config)
    traj = [(ox + 1.0, oy), (ox + 0.5, oy), (ox + 1.0, oy + 0.5)]
    # nearest sample sits two cells away from the occupied one
    assert np.isclose(min_clearance(traj, grid), 0.5)


def test_min_clearance_empty_grid_is_infinite():
    grid = empty_grid(16, 16, 0.25)
    assert np.isinf(min_clearance([(0.0, 0.0)], grid))


def test_min_clearance_ignores_out_of_grid_poses():
    grid = empty_grid(16, 16, 0.25)
    grid.cells[8, 8] = OCCUPIED
    val = min_clearance([(99.0, 99.0), (1.5, 1.5)], grid)
    assert np.isfinite(val)
    with pytest.raises(InvalidInput):
        min_clearance([(99.0, 99.0)], grid)


def test_hazard_violations_counts_rows():
    world = World(
        (-5, 5, -5, 5),
        [
            Entity(Disc(0.0, 0.0, 0.4), Category.ITEM, height=0.05, label="cable"),
            Entity(Disc(3.0, 3.0, 0.5), Category.STATIC, height=1.0),
        ],
        [],
    )
    traj = [
        (0.0, 0.0),  # inside the item
        (0.6, 0.0),  # disc overlap (gap 0.2 < 0.35)
        (1.5, 0.0),  # clear
        (3.0, 3.0),  # static only, not a hazard
    ]
    assert hazard_violations(traj, world, 0.35) == 2
    assert hazard_violations(np.empty((0, 2)), world, 0.35) == 0
