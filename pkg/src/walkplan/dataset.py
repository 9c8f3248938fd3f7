"""Corpus building and the per-stage training sample adapters.

A dataset directory holds train/val/test splits; each sample is a room
grid, its simulated trajectory, and the stage targets derived from the
ground truth (teacher forcing for stages 2 and 3).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .boundary import build_boundary_graph, door_runs, extract_boundary_loop, loop_labels_from_dfpg
from .grid import (
    CellLabel,
    Dfpg,
    derive_interior_map,
    dfpg_from_json,
    dfpg_to_json,
    traj_from_json,
    traj_to_json,
    walk_map,
)
from .rooms import GenConfig, GenerationError, generate_room
from .walker import SimConfig, simulate_walk

log = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")


@dataclass
class ImageSample:
    x: np.ndarray            # (C, n, n)
    y: np.ndarray            # (n, n) int64
    mask: np.ndarray | None  # (n, n) or None


@dataclass
class GraphSample:
    node_feats: np.ndarray   # (n_B, 14)
    nbr_idx: np.ndarray      # (n_B, 3)
    edge_feats: np.ndarray   # (n_B, 3, 2)
    labels: np.ndarray       # (n_B,) int64


@dataclass
class LoadedSample:
    sample_id: str
    room: Dfpg
    traj: np.ndarray
    walk: np.ndarray
    interior: np.ndarray
    furn: np.ndarray
    loop_labels: np.ndarray


def augment_image(x, y, mask, k: int, flip_h: bool, flip_v: bool):
    """Rotate by k quarter turns then flip; applied jointly to x, y, mask."""

    def tf(a):
        if a is None:
            return None
        a = np.rot90(a, k, axes=(-2, -1))
        if flip_h:
            a = a[..., ::-1]
        if flip_v:
            a = np.flip(a, axis=-2)
        return np.ascontiguousarray(a)

    return tf(x), tf(y), tf(mask)


def door_channel_maps(dfpg_or_n, door_refs=None):
    """Cell-space rasters of door segments: (horizontal, vertical) channels.

    A cell lights up when one of its bounding segments of that orientation
    is part of a door.
    """
    if isinstance(dfpg_or_n, Dfpg):
        n = dfpg_or_n.n
        refs = [
            ("h", int(r), int(c))
            for r, c in zip(*np.nonzero(dfpg_or_n.h_segments == 2))
        ] + [
            ("v", int(r), int(c))
            for r, c in zip(*np.nonzero(dfpg_or_n.v_segments == 2))
        ]
    else:
        n = dfpg_or_n
        refs = door_refs or []
    h_map = np.zeros((n, n), np.float64)
    v_map = np.zeros((n, n), np.float64)
    for kind, r, c in refs:
        if kind == "h":
            if r < n:
                h_map[r, c] = 1.0
            if r > 0:
                h_map[r - 1, c] = 1.0
        else:
            if c < n:
                v_map[r, c] = 1.0
            if c > 0:
                v_map[r, c - 1] = 1.0
    return h_map, v_map


def _rows01(mask: np.ndarray) -> list:
    return ["".join("1" if v else "0" for v in row) for row in np.asarray(mask) > 0.5]


def _from_rows01(rows: list) -> np.ndarray:
    return np.array([[ch == "1" for ch in row] for row in rows], np.float64)


def build_dataset(out_dir, count: int, gen_cfg: GenConfig, sim_cfg: SimConfig,
                  split=(0.8, 0.1, 0.1)) -> dict:
    """Generate rooms + walks and write the three split directories."""
    if count < 10:
        raise ValueError("counts >= 10 required")
    if abs(sum(split) - 1.0) > 1e-9:
        raise ValueError("split fractions must sum to 1")
    out = Path(out_dir)
    samples = []
    failed = 0
    for i in range(count):
        try:
            room = generate_room(replace(gen_cfg, seed=gen_cfg.seed + i))
        except GenerationError:
            failed += 1
            continue
        traj = simulate_walk(room, replace(sim_cfg, seed=sim_cfg.seed + i))
        samples.append((f"room_{i:05d}", room, traj))
    if failed:
        log.warning("skipped %d rooms that failed generation", failed)
    n = len(samples)
    n_val = int(round(n * split[1]))
    n_test = int(round(n * split[2]))
    n_train = n - n_val - n_test
    bounds = {"train": (0, n_train), "val": (n_train, n_train + n_val),
              "test": (n_train + n_val, n)}
    counts = {}
    for name, (lo, hi) in bounds.items():
        split_dir = out / name
        split_dir.mkdir(parents=True, exist_ok=True)
        for sid, room, traj in samples[lo:hi]:
            _write_sample(split_dir, sid, room, traj)
        counts[name] = hi - lo
    meta = {"requested": count, "generated": n, "failed": failed, "splits": counts,
            "gen_seed": gen_cfg.seed, "sim_seed": sim_cfg.seed,
            "n": gen_cfg.n, "cell_size_m": gen_cfg.cell_size_m}
    (out / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=1))
    return meta


def _write_sample(split_dir: Path, sid: str, room: Dfpg, traj: np.ndarray) -> None:
    interior = derive_interior_map(room)
    loop = extract_boundary_loop(interior)
    labels = loop_labels_from_dfpg(room, loop)
    targets = {
        "interior": _rows01(interior),
        "furn": _rows01(room.cells == CellLabel.FURN),
        "loss_mask": _rows01(interior),
        "loop": [list(ref) for ref in loop.refs],
        "loop_labels": labels.tolist(),
    }
    (split_dir / f"{sid}.room.json").write_text(dfpg_to_json(room))
    (split_dir / f"{sid}.traj.json").write_text(traj_to_json(traj))
    (split_dir / f"{sid}.targets.json").write_text(json.dumps(targets, sort_keys=True))


def load_split(split_dir) -> list:
    split_dir = Path(split_dir)
    out = []
    for room_file in sorted(split_dir.glob("*.room.json")):
        sid = room_file.name[: -len(".room.json")]
        room = dfpg_from_json(room_file.read_text())
        traj = traj_from_json((split_dir / f"{sid}.traj.json").read_text())
        targets = json.loads((split_dir / f"{sid}.targets.json").read_text())
        out.append(
            LoadedSample(
                sample_id=sid,
                room=room,
                traj=traj,
                walk=walk_map(traj, room.n, room.cell_size_m),
                interior=_from_rows01(targets["interior"]),
                furn=_from_rows01(targets["furn"]),
                loop_labels=np.array(targets["loop_labels"], np.int64),
            )
        )
    return out


def stage1_samples(loaded) -> list:
    return [
        ImageSample(x=s.walk[None].copy(), y=s.interior.astype(np.int64), mask=None)
        for s in loaded
    ]


def stage2_samples(loaded) -> list:
    out = []
    for s in loaded:
        loop = extract_boundary_loop(s.interior)
        graph = build_boundary_graph(loop, s.walk)
        if len(loop) != len(s.loop_labels):
            raise ValueError(f"loop mismatch for {s.sample_id}")
        out.append(
            GraphSample(
                node_feats=graph.node_feats,
                nbr_idx=graph.nbr_idx,
                edge_feats=graph.edge_feats,
                labels=s.loop_labels,
            )
        )
    return out


def stage3_samples(loaded) -> list:
    out = []
    for s in loaded:
        h_map, v_map = door_channel_maps(s.room)
        x = np.stack([s.walk, s.interior, h_map, v_map])
        out.append(
            ImageSample(x=x, y=s.furn.astype(np.int64), mask=s.interior.copy())
        )
    return out
