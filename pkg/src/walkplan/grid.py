"""Discrete floor plan grid: labeled cells plus labeled inter-cell segments.

The grid is an n x n lattice of cells. Horizontal segments sit between
vertically adjacent cells (array shape (n+1, n)), vertical segments between
horizontally adjacent cells (shape (n, n+1)). Row 0 is the top of the
top-down view; a cell (r, c) covers [c, c+1] x [r, r+1] in (x, y) cell
coordinates with y growing downward. Cells outside the grid count as OUT.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import accel


class CellLabel(IntEnum):
    OUT = 0
    IN = 1
    FURN = 2


class SegmentLabel(IntEnum):
    NONE = 0
    WALL = 1
    DOOR = 2


_CELL_CHARS = "OIF"
_SEG_CHARS = "NWD"

# A segment reference is ("h"|"v", row, col) into the matching segment array.
SegRef = tuple


@dataclass
class Dfpg:
    """n x n cell lattice with semantic cell and boundary-segment labels."""

    n: int = 64
    cell_size_m: float = 0.25
    cells: np.ndarray = field(default=None)
    h_segments: np.ndarray = field(default=None)
    v_segments: np.ndarray = field(default=None)

    def __post_init__(self):
        n = self.n
        if n <= 0 or self.cell_size_m <= 0:
            raise ValueError("grid size and cell size must be positive")
        if self.cells is None:
            self.cells = np.zeros((n, n), np.uint8)
        if self.h_segments is None:
            self.h_segments = np.zeros((n + 1, n), np.uint8)
        if self.v_segments is None:
            self.v_segments = np.zeros((n, n + 1), np.uint8)
        if self.cells.shape != (n, n):
            raise ValueError(f"cells must be ({n},{n}), got {self.cells.shape}")
        if self.h_segments.shape != (n + 1, n):
            raise ValueError(f"h_segments must be ({n + 1},{n})")
        if self.v_segments.shape != (n, n + 1):
            raise ValueError(f"v_segments must be ({n},{n + 1})")

    def copy(self) -> "Dfpg":
        return Dfpg(self.n, self.cell_size_m, self.cells.copy(),
                    self.h_segments.copy(), self.v_segments.copy())

    def segment_label(self, ref: SegRef) -> int:
        kind, r, c = ref
        arr = self.h_segments if kind == "h" else self.v_segments
        return int(arr[r, c])

    def set_segment(self, ref: SegRef, label: int) -> None:
        kind, r, c = ref
        arr = self.h_segments if kind == "h" else self.v_segments
        arr[r, c] = label


def derive_interior_map(dfpg: Dfpg) -> np.ndarray:
    """Binary map of the interior: 1 where the cell is IN or FURN."""
    return (dfpg.cells != CellLabel.OUT).astype(np.float64)


def derive_free_map(dfpg: Dfpg) -> np.ndarray:
    """Binary map of the free interior: 1 exactly where the cell is IN."""
    return (dfpg.cells == CellLabel.IN).astype(np.float64)


def cell_centers_m(n: int, cell_size_m: float) -> np.ndarray:
    """(n*n, 2) array of cell-center (x, y) coordinates in meters, row-major."""
    idx = np.arange(n, dtype=np.float64) + 0.5
    xx, yy = np.meshgrid(idx * cell_size_m, idx * cell_size_m)
    return np.stack([xx.ravel(), yy.ravel()], axis=1)


def walk_map(traj_m: np.ndarray, n: int, cell_size_m: float,
             cutoff_m: float = 0.5) -> np.ndarray:
    """Inverse-distance raster of a trajectory: max(0, 1 - d/cutoff) per cell.

    d is the Euclidean distance from the cell center to the nearest point on
    the trajectory polyline.
    """
    traj_m = np.asarray(traj_m, dtype=np.float64)
    if traj_m.ndim != 2 or traj_m.shape[0] == 0:
        raise ValueError("no trajectory")
    if cutoff_m <= 0:
        raise ValueError("cutoff must be positive")
    d = accel.polyline_point_dists(cell_centers_m(n, cell_size_m), traj_m)
    return np.maximum(0.0, 1.0 - d / cutoff_m).reshape(n, n)


def inverse_distance_map(dfpg: Dfpg, traj_m: np.ndarray,
                         cutoff_m: float = 0.5) -> np.ndarray:
    return walk_map(traj_m, dfpg.n, dfpg.cell_size_m, cutoff_m)


def boundary_segments(mask: np.ndarray, outside: float = 0.0) -> set:
    """Segment refs where interior flips across the segment.

    Cells beyond the grid take the value ``outside`` (OUT by default), so
    frame segments count when the edge cell differs from it.
    """
    m = np.asarray(mask) > 0.5
    n = m.shape[0]
    padded = np.full((n + 2, n + 2), outside > 0.5, bool)
    padded[1:-1, 1:-1] = m
    refs = set()
    hdiff = padded[:-1, 1:-1] != padded[1:, 1:-1]          # (n+1, n)
    for r, c in zip(*np.nonzero(hdiff)):
        refs.add(("h", int(r), int(c)))
    vdiff = padded[1:-1, :-1] != padded[1:-1, 1:]          # (n, n+1)
    for r, c in zip(*np.nonzero(vdiff)):
        refs.add(("v", int(r), int(c)))
    return refs


def labeled_boundary(dfpg: Dfpg) -> set:
    """Refs of all segments labeled WALL or DOOR."""
    refs = set()
    for r, c in zip(*np.nonzero(dfpg.h_segments != SegmentLabel.NONE)):
        refs.add(("h", int(r), int(c)))
    for r, c in zip(*np.nonzero(dfpg.v_segments != SegmentLabel.NONE)):
        refs.add(("v", int(r), int(c)))
    return refs


def segment_endpoints_cells(ref: SegRef) -> tuple:
    """((x0, y0), (x1, y1)) endpoints of a segment in cell coordinates."""
    kind, r, c = ref
    if kind == "h":
        return (float(c), float(r)), (float(c + 1), float(r))
    return (float(c), float(r)), (float(c), float(r + 1))


# ---------------------------------------------------------------------------
# serialization


def dfpg_to_json(dfpg: Dfpg) -> str:
    doc = {
        "n": dfpg.n,
        "cell_size_m": dfpg.cell_size_m,
        "cells": ["".join(_CELL_CHARS[v] for v in row) for row in dfpg.cells],
        "h_segments": ["".join(_SEG_CHARS[v] for v in row) for row in dfpg.h_segments],
        "v_segments": ["".join(_SEG_CHARS[v] for v in row) for row in dfpg.v_segments],
    }
    return json.dumps(doc, sort_keys=True)


def dfpg_from_json(text: str) -> Dfpg:
    doc = json.loads(text)
    n = int(doc["n"])

    def decode(rows, chars, shape):
        arr = np.array([[chars.index(ch) for ch in row] for row in rows], np.uint8)
        if arr.shape != shape:
            raise ValueError(f"bad grid document: expected {shape}, got {arr.shape}")
        return arr

    return Dfpg(
        n=n,
        cell_size_m=float(doc["cell_size_m"]),
        cells=decode(doc["cells"], _CELL_CHARS, (n, n)),
        h_segments=decode(doc["h_segments"], _SEG_CHARS, (n + 1, n)),
        v_segments=decode(doc["v_segments"], _SEG_CHARS, (n, n + 1)),
    )


def traj_to_json(traj_m: np.ndarray) -> str:
    return json.dumps([[float(x), float(y)] for x, y in np.asarray(traj_m)])


def traj_from_json(text: str) -> np.ndarray:
    pts = np.array(json.loads(text), np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("trajectory document must be a list of [x, y] pairs")
    return pts
