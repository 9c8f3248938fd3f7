"""Wall boundary loops and the door-detection graph.

The boundary of an interior mask is traversed as a closed clockwise loop of
unit segments, each directed so that the interior lies on its right-hand
side (screen coordinates, y down). The loop doubles as the node set of the
door-detection graph: nodes carry local geometry plus a 10-cell inward probe
of the trajectory inverse-distance map, and every node links to its
predecessor, successor, and the segment straight across the interior.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grid import Dfpg, SegmentLabel, SegRef

RAY_CELLS = 10
NODE_FEATURE_LEN = RAY_CELLS + 4
EDGE_FEATURE_LEN = 2


@dataclass
class BoundaryLoop:
    refs: list            # SegRef per loop position, clockwise
    headings: np.ndarray  # (n_B, 2) int, (dx, dy) with y down
    n: int                # grid side length

    def __len__(self):
        return len(self.refs)

    def orientations(self) -> np.ndarray:
        """0 for horizontal segments, 1 for vertical."""
        return np.array([1 if k == "v" else 0 for k, _, _ in self.refs], np.int64)

    def midpoints(self) -> np.ndarray:
        """(n_B, 2) midpoints in (x, y) cell coordinates."""
        out = np.empty((len(self.refs), 2), np.float64)
        for i, (kind, r, c) in enumerate(self.refs):
            if kind == "h":
                out[i] = (c + 0.5, r)
            else:
                out[i] = (c, r + 0.5)
        return out

    def interior_cells(self) -> np.ndarray:
        """(n_B, 2) (row, col) of the interior cell right of each segment."""
        out = np.empty((len(self.refs), 2), np.int64)
        for i, ((kind, r, c), (dx, dy)) in enumerate(zip(self.refs, self.headings)):
            if kind == "h":
                out[i] = (r, c) if dx > 0 else (r - 1, c)
            else:
                out[i] = (r, c - 1) if dy > 0 else (r, c)
        return out

    def inward_steps(self) -> np.ndarray:
        """(n_B, 2) (dr, dc) unit step from each segment into the interior."""
        # perpendicular right of heading (dx, dy) is (-dy, dx) in x/y, i.e.
        # (dr, dc) = (dx, -dy) in row/col terms
        return np.stack([self.headings[:, 0], -self.headings[:, 1]], axis=1)

    def index_of(self) -> dict:
        return {ref: i for i, ref in enumerate(self.refs)}


def _directed_boundary(interior: np.ndarray):
    m = np.asarray(interior) > 0.5
    n = m.shape[0]
    padded = np.zeros((n + 2, n + 2), bool)
    padded[1:-1, 1:-1] = m
    segs = []
    for r, c in zip(*np.nonzero(padded[:-1, 1:-1] != padded[1:, 1:-1])):
        below = padded[r + 1, c + 1]
        if below:
            segs.append((("h", int(r), int(c)), (1, 0), (c, r), (c + 1, r)))
        else:
            segs.append((("h", int(r), int(c)), (-1, 0), (c + 1, r), (c, r)))
    for r, c in zip(*np.nonzero(padded[1:-1, :-1] != padded[1:-1, 1:])):
        right = padded[r + 1, c + 1]
        if right:
            segs.append((("v", int(r), int(c)), (0, -1), (c, r + 1), (c, r)))
        else:
            segs.append((("v", int(r), int(c)), (0, 1), (c, r), (c, r + 1)))
    return segs


def extract_boundary_loop(interior: np.ndarray) -> BoundaryLoop:
    """Order all boundary segments of the mask into one clockwise loop.

    Raises ValueError("non-simple boundary") when the transitions do not
    form a single closed circuit (multiple components or interior holes).
    At pinch vertices the walk takes the rightmost available turn, which
    keeps the circuit non-crossing.
    """
    segs = _directed_boundary(interior)
    if not segs:
        raise ValueError("non-simple boundary: empty mask")
    by_start = {}
    for i, (_, _, start, _) in enumerate(segs):
        by_start.setdefault(start, []).append(i)
    # canonical start: topmost-leftmost horizontal segment (interior below)
    start_idx = min(
        (i for i, (ref, hd, _, _) in enumerate(segs) if ref[0] == "h" and hd[0] > 0),
        key=lambda i: (segs[i][0][1], segs[i][0][2]),
    )
    order = []
    used = [False] * len(segs)
    cur = start_idx
    while True:
        order.append(cur)
        used[cur] = True
        _, (dx, dy), _, end = segs[cur]
        cands = [j for j in by_start.get(end, ()) if not used[j]]
        if not cands:
            break
        if len(cands) == 1:
            cur = cands[0]
        else:
            # rightmost turn first, then straight, then left
            pri = {(-dy, dx): 0, (dx, dy): 1, (dy, -dx): 2}
            cur = min(cands, key=lambda j: pri.get(tuple(segs[j][1]), 3))
    closed = segs[order[-1]][3] == segs[start_idx][2]
    if not closed or len(order) != len(segs):
        raise ValueError("non-simple boundary")
    refs = [segs[i][0] for i in order]
    headings = np.array([segs[i][1] for i in order], np.int64)
    return BoundaryLoop(refs=refs, headings=headings, n=int(interior.shape[0]))


def loop_interior_mask(loop: BoundaryLoop, n: int | None = None) -> np.ndarray:
    """Rebuild the binary interior mask enclosed by a boundary loop."""
    n = loop.n if n is None else n
    walls = set(loop.refs)
    mask = np.zeros((n, n), bool)
    r0, c0 = loop.interior_cells()[0]
    stack = [(int(r0), int(c0))]
    mask[r0, c0] = True
    while stack:
        r, c = stack.pop()
        for dr, dc, ref in (
            (-1, 0, ("h", r, c)),
            (1, 0, ("h", r + 1, c)),
            (0, -1, ("v", r, c)),
            (0, 1, ("v", r, c + 1)),
        ):
            if ref in walls:
                continue
            rr, cc = r + dr, c + dc
            if 0 <= rr < n and 0 <= cc < n and not mask[rr, cc]:
                mask[rr, cc] = True
                stack.append((rr, cc))
    return mask.astype(np.float64)


def opposite_segment(loop: BoundaryLoop, i: int,
                     interior: np.ndarray | None = None) -> int:
    """Loop index of the segment a perpendicular inward ray first exits by."""
    if interior is None:
        interior = loop_interior_mask(loop)
    inter = np.asarray(interior) > 0.5
    n = inter.shape[0]
    r, c = loop.interior_cells()[i]
    dr, dc = loop.inward_steps()[i]
    while True:
        rr, cc = r + dr, c + dc
        if not (0 <= rr < n and 0 <= cc < n) or not inter[rr, cc]:
            break
        r, c = rr, cc
    if dr == 1:
        exit_ref = ("h", int(r + 1), int(c))
    elif dr == -1:
        exit_ref = ("h", int(r), int(c))
    elif dc == 1:
        exit_ref = ("v", int(r), int(c + 1))
    else:
        exit_ref = ("v", int(r), int(c))
    return loop.index_of()[exit_ref]


def corner_distances(loop: BoundaryLoop) -> np.ndarray:
    """Per-node distance (in segments) to the nearest corner, both ways.

    A corner sits at the junction of two consecutive segments with different
    orientations; the two segments flanking it have distance 0.
    """
    o = loop.orientations()
    n_b = len(o)
    corner_after = o != np.roll(o, -1)  # corner between i and i+1
    fwd = np.empty(n_b, np.float64)
    bwd = np.empty(n_b, np.float64)
    # two circular sweeps; a closed rectilinear loop always has corners
    fwd[:] = np.inf
    bwd[:] = np.inf
    for _ in range(2):
        for i in range(n_b - 1, -1, -1):
            fwd[i] = 0.0 if corner_after[i] else min(fwd[i], fwd[(i + 1) % n_b] + 1)
        for i in range(n_b):
            bwd[i] = 0.0 if corner_after[i - 1] else min(bwd[i], bwd[i - 1] + 1)
    return np.minimum(fwd, bwd)


@dataclass
class BoundaryGraph:
    loop: BoundaryLoop
    node_feats: np.ndarray   # (n_B, 14) float64, normalized
    nbr_idx: np.ndarray      # (n_B, 3) int64: prev, next, opposite
    edge_feats: np.ndarray   # (n_B, 3, 2) float64
    corner_dists: np.ndarray  # (n_B,) raw segment counts
    opposite: np.ndarray      # (n_B,) int64


def build_boundary_graph(loop: BoundaryLoop, walk: np.ndarray) -> BoundaryGraph:
    """Assemble node and edge features for door detection.

    Node features: [corner distance / n_B, orientation flag, 10 inward
    walk-map samples, midpoint x / n, midpoint y / n]. Edge features:
    [orientation dissimilarity, L1 midpoint distance in cells].
    """
    n_b = len(loop)
    n = loop.n
    interior = loop_interior_mask(loop)
    inter = interior > 0.5
    orient = loop.orientations()
    mids = loop.midpoints()
    corners = corner_distances(loop)

    rays = np.zeros((n_b, RAY_CELLS), np.float64)
    cells = loop.interior_cells()
    steps = loop.inward_steps()
    for i in range(n_b):
        r, c = cells[i]
        dr, dc = steps[i]
        for k in range(RAY_CELLS):
            if not (0 <= r < n and 0 <= c < n) or not inter[r, c]:
                break
            rays[i, k] = walk[r, c]
            r += dr
            c += dc

    node_feats = np.concatenate(
        [
            (corners / n_b)[:, None],
            orient[:, None].astype(np.float64),
            rays,
            mids / n,
        ],
        axis=1,
    )

    idx = np.arange(n_b)
    opp = np.array([opposite_segment(loop, i, interior) for i in idx], np.int64)
    nbr = np.stack([(idx - 1) % n_b, (idx + 1) % n_b, opp], axis=1)

    edge_feats = np.empty((n_b, 3, 2), np.float64)
    for k in range(3):
        j = nbr[:, k]
        edge_feats[:, k, 0] = (orient != orient[j]).astype(np.float64)
        edge_feats[:, k, 1] = np.abs(mids - mids[j]).sum(axis=1)
    return BoundaryGraph(loop=loop, node_feats=node_feats, nbr_idx=nbr,
                         edge_feats=edge_feats, corner_dists=corners, opposite=opp)


def graph_to_json(graph: BoundaryGraph) -> str:
    doc = {
        "segments": [list(ref) for ref in graph.loop.refs],
        "node_features": graph.node_feats.tolist(),
        "neighbors": graph.nbr_idx.tolist(),
        "edge_features": graph.edge_feats.tolist(),
    }
    return json.dumps(doc, sort_keys=True)


# ---------------------------------------------------------------------------
# label helpers shared by the generator, the regularizer and the cascade


def straight_runs(loop: BoundaryLoop) -> list:
    """Maximal runs of consecutive collinear segments, as circular index lists."""
    o = loop.orientations()
    n_b = len(o)
    if np.all(o == o[0]):  # cannot happen for a closed loop; guard anyway
        return [list(range(n_b))]
    # rotate so position 0 starts a run
    start = next(i for i in range(n_b) if o[i] != o[i - 1])
    runs = []
    run = [start]
    for k in range(1, n_b):
        i = (start + k) % n_b
        if o[i] == o[run[-1]]:
            run.append(i)
        else:
            runs.append(run)
            run = [i]
    runs.append(run)
    return runs


def loop_labels_from_dfpg(dfpg: Dfpg, loop: BoundaryLoop) -> np.ndarray:
    """1 where the loop segment is labeled DOOR in the grid, else 0."""
    return np.array(
        [1 if dfpg.segment_label(ref) == SegmentLabel.DOOR else 0 for ref in loop.refs],
        np.int64,
    )


def door_runs(labels: np.ndarray) -> list:
    """Maximal circular runs of door-labeled loop positions."""
    n_b = len(labels)
    pos = [i for i in range(n_b) if labels[i]]
    if not pos:
        return []
    if len(pos) == n_b:
        return [list(range(n_b))]
    start = next(i for i in range(n_b) if labels[i] and not labels[i - 1])
    runs = []
    run = []
    for k in range(n_b):
        i = (start + k) % n_b
        if labels[i]:
            run.append(i)
        elif run:
            runs.append(run)
            run = []
    if run:
        runs.append(run)
    return runs
