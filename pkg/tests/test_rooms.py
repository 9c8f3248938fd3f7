import numpy as np
import pytest

from walkplan.boundary import door_runs, extract_boundary_loop, loop_labels_from_dfpg
from walkplan.grid import CellLabel, SegmentLabel, derive_free_map, dfpg_to_json
from walkplan.morph import label_components
from walkplan.rooms import GenConfig, check_room, generate_room, room_problems


def test_same_seed_identical():
    a = generate_room(GenConfig(seed=42))
    b = generate_room(GenConfig(seed=42))
    assert dfpg_to_json(a) == dfpg_to_json(b)


def test_different_seeds_differ():
    a = generate_room(GenConfig(seed=1))
    b = generate_room(GenConfig(seed=2))
    assert dfpg_to_json(a) != dfpg_to_json(b)


def test_outputs_valid():
    for seed in range(30):
        room = generate_room(GenConfig(seed=seed))
        assert room_problems(room) == []


def test_has_door_and_furniture():
    room = generate_room(GenConfig(seed=7))
    assert (room.cells == CellLabel.FURN).any()
    assert (room.h_segments == SegmentLabel.DOOR).any() or (
        room.v_segments == SegmentLabel.DOOR
    ).any()


def test_door_width_exactly_four():
    for seed in range(20):
        room = generate_room(GenConfig(seed=seed))
        interior = (room.cells != CellLabel.OUT).astype(float)
        loop = extract_boundary_loop(interior)
        for run in door_runs(loop_labels_from_dfpg(room, loop)):
            assert len(run) == 4


def test_free_space_connected_many_seeds():
    for seed in range(60):
        room = generate_room(GenConfig(seed=seed))
        _, count = label_components(derive_free_map(room))
        assert count == 1


def test_room_fits_bounds():
    for seed in range(20):
        cfg = GenConfig(seed=seed)
        room = generate_room(cfg)
        rows, cols = np.nonzero(room.cells != CellLabel.OUT)
        h = rows.max() - rows.min() + 1
        w = cols.max() - cols.min() + 1
        lo = cfg.min_side_m / cfg.cell_size_m
        hi = cfg.max_side_m / cfg.cell_size_m
        assert lo <= h <= hi and lo <= w <= hi
        assert rows.min() >= 1 and cols.min() >= 1
        assert rows.max() <= cfg.n - 2 and cols.max() <= cfg.n - 2


def test_rectangles_only_mode():
    cfg = GenConfig(seed=3, max_concavities=0)
    room = generate_room(cfg)
    interior = room.cells != CellLabel.OUT
    rows, cols = np.nonzero(interior)
    area = (rows.max() - rows.min() + 1) * (cols.max() - cols.min() + 1)
    assert interior.sum() == area


def test_small_grid_config():
    cfg = GenConfig(seed=5, n=32, max_side_m=6.0)
    room = generate_room(cfg)
    assert room.n == 32
    assert room_problems(room) == []


def test_min_side_floor_enforced():
    with pytest.raises(ValueError):
        GenConfig(seed=0, min_side_m=2.0)


def test_check_room_raises_on_broken():
    room = generate_room(GenConfig(seed=11))
    room.h_segments[:] = SegmentLabel.NONE
    room.v_segments[:] = SegmentLabel.NONE
    with pytest.raises(ValueError, match="invalid room"):
        check_room(room)


def test_furniture_keeps_door_clear():
    for seed in range(20):
        room = generate_room(GenConfig(seed=seed))
        interior = (room.cells != CellLabel.OUT).astype(float)
        loop = extract_boundary_loop(interior)
        labels = loop_labels_from_dfpg(room, loop)
        cells = loop.interior_cells()
        furn = room.cells == CellLabel.FURN
        n = room.n
        for run in door_runs(labels):
            for p in run:
                r, c = cells[p]
                patch = furn[max(0, r - 1):min(n, r + 2), max(0, c - 1):min(n, c + 2)]
                assert not patch.any()
