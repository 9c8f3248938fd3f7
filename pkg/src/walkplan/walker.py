"""Randomized walk simulation through a ground-truth room.

Waypoints are stratified samples over the buffered free space, ordered as an
open traveling-salesman tour and stitched with grid shortest paths. The walk
then detours around each free-standing furniture block and out-and-back to
every door, so door signatures and obstacle loops show up in the inverse
distance raster the networks consume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import accel
from .boundary import door_runs, extract_boundary_loop, loop_labels_from_dfpg
from .grid import Dfpg, derive_free_map, derive_interior_map
from .morph import binary_erode, label_components


@dataclass
class SimConfig:
    seed: int = 0
    strat_cell_m: float = 2.0
    wall_buffer_cells: int = 1
    loop_points: int = 4

    def __post_init__(self):
        if self.strat_cell_m <= 0:
            raise ValueError("strat_cell_m must be positive")
        if self.wall_buffer_cells < 0:
            raise ValueError("wall_buffer_cells must be >= 0")


def stratified_samples(free_b: np.ndarray, occupied: np.ndarray, cfg: SimConfig,
                       rng, cell_size_m: float = 0.25) -> list:
    """At most one cell per block, weighted by distance to occupied space."""
    n = free_b.shape[0]
    block = max(1, round(cfg.strat_cell_m / cell_size_m))
    dist = accel.nearest_occupied_dist(np.asarray(occupied, np.uint8))
    samples = []
    for r0 in range(0, n, block):
        for c0 in range(0, n, block):
            rows, cols = np.nonzero(free_b[r0:r0 + block, c0:c0 + block])
            if rows.size == 0:
                continue
            rows = rows + r0
            cols = cols + c0
            w = dist[rows, cols]
            pick = int(rng.choice(rows.size, p=w / w.sum()))
            samples.append((int(rows[pick]), int(cols[pick])))
    if not samples:
        raise ValueError("no free space")
    return samples


def _tour_length(pts, order):
    return sum(
        np.hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1])
        for a, b in zip(order[:-1], order[1:])
    )


def _nearest_neighbor_order(pts, start):
    n = len(pts)
    left = set(range(n))
    order = [start]
    left.remove(start)
    while left:
        r, c = pts[order[-1]]
        nxt = min(left, key=lambda j: ((pts[j][0] - r) ** 2 + (pts[j][1] - c) ** 2, j))
        order.append(nxt)
        left.remove(nxt)
    return order


def _two_opt(pts, order):
    n = len(order)
    d = lambda a, b: np.hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1])
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                before = (d(order[i - 1], order[i]) if i > 0 else 0.0) + (
                    d(order[j], order[j + 1]) if j + 1 < n else 0.0
                )
                after = (d(order[i - 1], order[j]) if i > 0 else 0.0) + (
                    d(order[i], order[j + 1]) if j + 1 < n else 0.0
                )
                if after < before - 1e-9:
                    order[i:j + 1] = order[i:j + 1][::-1]
                    improved = True
    return order


def order_tsp(points: list, rng) -> list:
    """Open-tour ordering: nearest neighbor from a random start, then 2-opt."""
    if not points:
        raise ValueError("no points to order")
    if len(points) == 1:
        return list(points)
    start = int(rng.integers(len(points)))
    order = _two_opt(points, _nearest_neighbor_order(points, start))
    return [points[i] for i in order]


def grid_shortest_path(passable: np.ndarray, a, b) -> list:
    """8-connected min-cost cell path (steps 1 / sqrt 2) from a to b."""
    p = np.asarray(passable, np.uint8)
    if not p[a] or not p[b]:
        raise ValueError("disconnected")
    path = accel.grid_dijkstra(p, int(a[0]), int(a[1]), int(b[0]), int(b[1]))
    if path.shape[0] == 0:
        raise ValueError("disconnected")
    return [(int(r), int(c)) for r, c in path]


def furniture_loops(gt: Dfpg, rng, loop_points: int = 4) -> list:
    """One ring of points around each furniture region's bounding box.

    Points are sampled one per box side (top, right, bottom, left order),
    one cell outside the box. A loop is dropped whole when any sampled point
    lands outside the free space.
    """
    free = derive_free_map(gt)
    n = gt.n
    furn = (np.asarray(gt.cells) == 2).astype(np.float64)
    labels, count = label_components(furn)
    loops = []
    for comp in range(1, count + 1):
        rows, cols = np.nonzero(labels == comp)
        r0, r1 = int(rows.min()), int(rows.max())
        c0, c1 = int(cols.min()), int(cols.max())
        pts = []
        for k in range(loop_points):
            side = k % 4
            if side == 0:
                pts.append((r0 - 1, int(rng.integers(c0, c1 + 1))))
            elif side == 1:
                pts.append((int(rng.integers(r0, r1 + 1)), c1 + 1))
            elif side == 2:
                pts.append((r1 + 1, int(rng.integers(c0, c1 + 1))))
            else:
                pts.append((int(rng.integers(r0, r1 + 1)), c0 - 1))
        ok = all(0 <= r < n and 0 <= c < n and free[r, c] > 0 for r, c in pts)
        if ok:
            loops.append(pts)
    return loops


def _nearest_pair(cells, targets):
    """Indices (cell position in trajectory, target index) of the closest pair."""
    arr = np.asarray(cells, np.float64)
    tg = np.asarray(targets, np.float64)
    d = ((arr[:, None, :] - tg[None, :, :]) ** 2).sum(axis=2)
    k = int(np.argmin(d))
    return k // len(targets), k % len(targets)


def _splice_detour(cells, k, detour):
    return cells[:k + 1] + detour + cells[k + 1:]


def _door_targets(gt: Dfpg):
    interior = derive_interior_map(gt)
    loop = extract_boundary_loop(interior)
    labels = loop_labels_from_dfpg(gt, loop)
    cells = loop.interior_cells()
    targets = []
    for run in door_runs(labels):
        mid = run[len(run) // 2]
        targets.append((int(cells[mid][0]), int(cells[mid][1])))
    return targets


def simulate_walk(gt: Dfpg, cfg: SimConfig) -> np.ndarray:
    """Deterministic trajectory through the free space of a room, in meters."""
    free = derive_free_map(gt)
    occupied = (free == 0).astype(np.uint8)
    free_b = binary_erode(free, cfg.wall_buffer_cells) if cfg.wall_buffer_cells else free
    rng = np.random.default_rng(cfg.seed)
    samples = stratified_samples(free_b, occupied, cfg, rng, gt.cell_size_m)

    # tour legs run on the buffered space; keep waypoints in one component
    comp_labels, n_comp = label_components(free_b)
    if n_comp > 1:
        sizes = np.bincount(comp_labels.ravel())[1:]
        keep = int(np.argmax(sizes)) + 1
        kept = [p for p in samples if comp_labels[p] == keep]
        samples = kept if kept else [samples[0]]

    ordered = order_tsp(samples, rng)
    cells = [ordered[0]]
    for nxt in ordered[1:]:
        cells.extend(grid_shortest_path(free_b, cells[-1], nxt)[1:])

    # detours: around furniture regions, then out-and-back to every door
    for ring in furniture_loops(gt, rng, cfg.loop_points):
        k, j = _nearest_pair(cells, ring)
        entry = grid_shortest_path(free, cells[k], ring[j])
        circuit = []
        cyc = ring[j:] + ring[:j] + [ring[j]]
        for a, b in zip(cyc[:-1], cyc[1:]):
            circuit.extend(grid_shortest_path(free, a, b)[1:])
        detour = entry[1:] + circuit + entry[-2::-1]
        cells = _splice_detour(cells, k, detour)
    for target in _door_targets(gt):
        k, _ = _nearest_pair(cells, [target])
        leg = grid_shortest_path(free, cells[k], target)
        detour = leg[1:] + leg[-2::-1]
        cells = _splice_detour(cells, k, detour)

    s = gt.cell_size_m
    pts = [((c + 0.5) * s, (r + 0.5) * s) for r, c in cells]
    dedup = [pts[0]]
    for p in pts[1:]:
        if p != dedup[-1]:
            dedup.append(p)
    return np.array(dedup, np.float64)
