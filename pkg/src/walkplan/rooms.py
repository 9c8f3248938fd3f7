"""Procedural single-room ground truth: footprint, doors, furniture.

Footprints are rectangles with rectangular corner notches. Doors are
4-segment (1 m) openings on straight wall runs. Furniture blocks are
axis-aligned rectangles that never overlap, never crowd a door, and leave
the free space 4-connected. Everything is a pure function of the config
seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import extract_boundary_loop, straight_runs
from .grid import CellLabel, Dfpg, SegmentLabel, boundary_segments, derive_free_map
from .morph import binary_erode, label_components

DOOR_WIDTH = 4
_MARGIN = 2
_MAX_ROOM_TRIES = 100
_MAX_PLACE_TRIES = 100


class GenerationError(RuntimeError):
    pass


@dataclass
class GenConfig:
    seed: int = 0
    min_side_m: float = 3.0
    max_side_m: float = 10.0
    max_concavities: int = 3
    door_count_range: tuple = (1, 3)
    furniture_count_range: tuple = (1, 6)
    min_furniture_side_m: float = 0.5
    wall_adjacency_prob: float = 0.7
    n: int = 64
    cell_size_m: float = 0.25

    def __post_init__(self):
        if self.min_side_m < 3.0:
            raise ValueError("min_side_m below the 3.0 m floor")
        lo = math.ceil(self.min_side_m / self.cell_size_m)
        if lo > self.n - 2 * _MARGIN:
            raise ValueError("grid too small for the minimum room side")


def _footprint(cfg: GenConfig, rng) -> np.ndarray:
    n = cfg.n
    lo = math.ceil(cfg.min_side_m / cfg.cell_size_m)
    hi = min(int(cfg.max_side_m / cfg.cell_size_m), n - 2 * _MARGIN)
    w = int(rng.integers(lo, hi + 1))
    h = int(rng.integers(lo, hi + 1))
    r0 = int(rng.integers(_MARGIN, n - _MARGIN - h + 1))
    c0 = int(rng.integers(_MARGIN, n - _MARGIN - w + 1))
    mask = np.zeros((n, n), bool)
    mask[r0:r0 + h, c0:c0 + w] = True
    k = int(rng.integers(0, cfg.max_concavities + 1))
    corners = rng.permutation(4)[:k]
    for corner in corners:
        # notch sizes capped at half the side so notches never interact
        nw = int(rng.integers(3, max(3, w // 2 - 2) + 1))
        nh = int(rng.integers(3, max(3, h // 2 - 2) + 1))
        if corner == 0:
            mask[r0:r0 + nh, c0:c0 + nw] = False
        elif corner == 1:
            mask[r0:r0 + nh, c0 + w - nw:c0 + w] = False
        elif corner == 2:
            mask[r0 + h - nh:r0 + h, c0:c0 + nw] = False
        else:
            mask[r0 + h - nh:r0 + h, c0 + w - nw:c0 + w] = False
    return mask


def _place_doors(loop, count, rng):
    """Pick non-adjacent 4-segment stretches on straight wall runs."""
    runs = [run for run in straight_runs(loop) if len(run) >= DOOR_WIDTH]
    if not runs:
        return None
    taken = set()
    doors = []
    for _ in range(count):
        for _ in range(_MAX_PLACE_TRIES):
            run = runs[int(rng.integers(len(runs)))]
            off = int(rng.integers(0, len(run) - DOOR_WIDTH + 1))
            pos = run[off:off + DOOR_WIDTH]
            n_b = len(loop)
            guard = set(pos) | {(pos[0] - 1) % n_b, (pos[-1] + 1) % n_b}
            if guard & taken:
                continue
            taken |= set(pos)
            doors.append(pos)
            break
        else:
            return None
    return doors


def _slide_to_wall(rect, placeable, rng):
    r, c, h, w = rect
    dr, dc = ((-1, 0), (1, 0), (0, -1), (0, 1))[int(rng.integers(4))]
    n_r, n_c = placeable.shape
    while True:
        rr, cc = r + dr, c + dc
        if rr < 0 or cc < 0 or rr + h > n_r or cc + w > n_c:
            break
        if not placeable[rr:rr + h, cc:cc + w].all():
            break
        r, c = rr, cc
    return r, c, h, w


def _place_furniture(interior, protected, count, cfg: GenConfig, rng):
    n = interior.shape[0]
    rows, cols = np.nonzero(interior)
    r_lo, r_hi = rows.min(), rows.max()
    c_lo, c_hi = cols.min(), cols.max()
    min_cells = max(2, math.ceil(cfg.min_furniture_side_m / cfg.cell_size_m))
    max_cells = min_cells + 6
    furn = np.zeros((n, n), bool)
    placed = 0
    for _ in range(count):
        for _ in range(_MAX_PLACE_TRIES):
            h = int(rng.integers(min_cells, max_cells + 1))
            w = int(rng.integers(min_cells, max_cells + 1))
            if r_hi - r_lo + 1 < h or c_hi - c_lo + 1 < w:
                continue
            r = int(rng.integers(r_lo, r_hi - h + 2))
            c = int(rng.integers(c_lo, c_hi - w + 2))
            placeable = interior & ~furn
            if rng.random() < cfg.wall_adjacency_prob and placeable[r:r + h, c:c + w].all():
                r, c, h, w = _slide_to_wall((r, c, h, w), placeable, rng)
            if not placeable[r:r + h, c:c + w].all():
                continue
            if protected[r:r + h, c:c + w].any():
                continue
            block = np.zeros((n, n), bool)
            block[r:r + h, c:c + w] = True
            free_after = interior & ~furn & ~block
            if not free_after.any():
                continue
            _, n_comp = label_components(free_after)
            if n_comp != 1:
                continue
            furn |= block
            placed += 1
            break
    return furn, placed


def generate_room(cfg: GenConfig) -> Dfpg:
    """Deterministic valid room for the config seed.

    Raises GenerationError when no valid room is found within the retry
    budget.
    """
    rng = np.random.default_rng(cfg.seed)
    for _ in range(_MAX_ROOM_TRIES):
        interior = _footprint(cfg, rng)
        loop = extract_boundary_loop(interior.astype(np.float64))
        door_count = int(rng.integers(cfg.door_count_range[0], cfg.door_count_range[1] + 1))
        doors = _place_doors(loop, door_count, rng)
        if doors is None:
            continue
        door_cells = loop.interior_cells()
        protected = np.zeros_like(interior)
        for pos_list in doors:
            for p in pos_list:
                r, c = door_cells[p]
                protected[max(0, r - 1):r + 2, max(0, c - 1):c + 2] = True
        furn_count = int(
            rng.integers(cfg.furniture_count_range[0], cfg.furniture_count_range[1] + 1)
        )
        furn, placed = _place_furniture(interior, protected, furn_count, cfg, rng)
        if placed < 1:
            continue
        free = interior & ~furn
        if binary_erode(free.astype(np.float64), 1).sum() == 0:
            continue  # simulator needs buffered free space

        dfpg = Dfpg(n=cfg.n, cell_size_m=cfg.cell_size_m)
        dfpg.cells[interior] = CellLabel.IN
        dfpg.cells[furn] = CellLabel.FURN
        for ref in boundary_segments(interior.astype(np.float64)):
            dfpg.set_segment(ref, SegmentLabel.WALL)
        for pos_list in doors:
            for p in pos_list:
                dfpg.set_segment(loop.refs[p], SegmentLabel.DOOR)
        if room_problems(dfpg):
            continue
        return dfpg
    raise GenerationError("generation failed")


def room_problems(dfpg: Dfpg, door_width: int = DOOR_WIDTH,
                  require_furniture: bool = True) -> list:
    """All violated validity conditions of a single-room grid ([] = valid)."""
    from .boundary import door_runs, loop_labels_from_dfpg

    problems = []
    interior = (dfpg.cells != CellLabel.OUT).astype(np.float64)
    if interior.sum() == 0:
        return ["empty interior"]
    if boundary_segments(interior) != _labeled_refs(dfpg):
        problems.append("wall/door labels do not match interior transitions")
    try:
        loop = extract_boundary_loop(interior)
    except ValueError as exc:
        return problems + [str(exc)]
    labels = loop_labels_from_dfpg(dfpg, loop)
    runs = door_runs(labels)
    if not runs:
        problems.append("no door")
    wall_runs = straight_runs(loop)
    run_of = {}
    for run in wall_runs:
        for i in run:
            run_of[i] = len(run)
    for run in runs:
        host = run_of[run[len(run) // 2]]
        if len(run) != min(door_width, host):
            problems.append(f"door run of width {len(run)} (host wall {host})")
    cells = loop.interior_cells()
    free = derive_free_map(dfpg)
    for run in runs:
        if not any(free[tuple(cells[p])] > 0 for p in run):
            problems.append("door without adjacent free cell")
    _, n_free = label_components(free)
    if n_free != 1:
        problems.append(f"free space has {n_free} components")
    if require_furniture and not (dfpg.cells == CellLabel.FURN).any():
        problems.append("no furniture")
    return problems


def check_room(dfpg: Dfpg, **kwargs) -> None:
    problems = room_problems(dfpg, **kwargs)
    if problems:
        raise ValueError("invalid room: " + "; ".join(problems))


def _labeled_refs(dfpg: Dfpg) -> set:
    refs = set()
    for r, c in zip(*np.nonzero(dfpg.h_segments != SegmentLabel.NONE)):
        refs.add(("h", int(r), int(c)))
    for r, c in zip(*np.nonzero(dfpg.v_segments != SegmentLabel.NONE)):
        refs.add(("v", int(r), int(c)))
    return refs
