"""The two model families: convolutional encoder-decoder and edge-conditioned
graph network, plus checkpoint io."""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .tensor import BnState, Tensor

CHECKPOINT_VERSION = 1


@dataclass
class EncDecConfig:
    levels: int = 3
    base_features: int = 16
    in_channels: int = 1
    out_channels: int = 2

    def __post_init__(self):
        if self.levels < 1 or self.base_features < 1:
            raise ValueError("levels and base_features must be >= 1")


class EncDec:
    """U-style encoder-decoder: per level conv3x3+ReLU+pool going down,
    convT+skip-concat+conv3x3+ReLU going up, 1x1 conv head."""

    kind = "encdec"

    def __init__(self, cfg: EncDecConfig, seed: int = 0):
        self.cfg = cfg
        rng = np.random.default_rng(seed)
        p = {}

        def he(shape, fan_in):
            return Tensor(rng.normal(0.0, np.sqrt(2.0 / fan_in), shape), requires_grad=True)

        ch = cfg.in_channels
        for lv in range(cfg.levels):
            f = cfg.base_features * 2 ** lv
            p[f"enc{lv}.w"] = he((f, ch, 3, 3), ch * 9)
            p[f"enc{lv}.b"] = Tensor(np.zeros(f), requires_grad=True)
            ch = f
        for lv in reversed(range(cfg.levels)):
            f = cfg.base_features * 2 ** lv
            p[f"up{lv}.w"] = he((ch, f, 2, 2), ch * 4)
            p[f"up{lv}.b"] = Tensor(np.zeros(f), requires_grad=True)
            p[f"dec{lv}.w"] = he((f, 2 * f, 3, 3), 2 * f * 9)
            p[f"dec{lv}.b"] = Tensor(np.zeros(f), requires_grad=True)
            ch = f
        p["out.w"] = he((cfg.out_channels, ch), ch)
        p["out.b"] = Tensor(np.zeros(cfg.out_channels), requires_grad=True)
        self.params = p

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        n = x.data.shape[-1]
        if n % 2 ** self.cfg.levels:
            raise ValueError(f"spatial size {n} not divisible by {2 ** self.cfg.levels}")
        p = self.params
        skips = []
        h = x
        for lv in range(self.cfg.levels):
            h = T.relu(T.conv3x3(h, p[f"enc{lv}.w"], p[f"enc{lv}.b"]))
            skips.append(h)
            h = T.maxpool2(h)
        for lv in reversed(range(self.cfg.levels)):
            h = T.convt2(h, p[f"up{lv}.w"], p[f"up{lv}.b"])
            h = T.concat_channels(h, skips[lv])
            h = T.relu(T.conv3x3(h, p[f"dec{lv}.w"], p[f"dec{lv}.b"]))
        return T.conv1x1(h, p["out.w"], p["out.b"])

    def logits(self, x: np.ndarray) -> np.ndarray:
        """Inference forward on a (C, n, n) image; returns (K, n, n)."""
        return self.forward(Tensor(x[None]), training=False).data[0]

    def state_arrays(self):
        return {}

    def config_doc(self):
        return {"levels": self.cfg.levels, "base_features": self.cfg.base_features,
                "in_channels": self.cfg.in_channels, "out_channels": self.cfg.out_channels}


@dataclass
class EccConfig:
    block_depths: tuple = (64, 128, 128, 64, 2)
    fgn_hidden: tuple = (16, 32)
    node_feature_len: int = 14
    edge_feature_len: int = 2

    def __post_init__(self):
        self.block_depths = tuple(self.block_depths)
        self.fgn_hidden = tuple(self.fgn_hidden)
        if self.block_depths[-1] != 2:
            raise ValueError("last block depth must be 2 (door/wall logits)")


class EccNet:
    """Edge-conditioned graph convolution stack over the boundary loop.

    Per block: h <- ReLU(BN(W_root h + mean_j Phi(e_ij) h_j + b)), where Phi
    is a 3-layer filter-generating network on the edge features. The final
    block keeps BN but omits the ReLU so it emits logits.
    """

    kind = "ecc"

    def __init__(self, cfg: EccConfig, seed: int = 0):
        self.cfg = cfg
        rng = np.random.default_rng(seed)
        p = {}
        self.bn_states = []
        h1, h2 = cfg.fgn_hidden
        din = cfg.node_feature_len
        for l, dout in enumerate(cfg.block_depths):
            p[f"b{l}.root.w"] = Tensor(
                rng.normal(0.0, np.sqrt(2.0 / din), (dout, din)), requires_grad=True)
            p[f"b{l}.root.b"] = Tensor(np.zeros(dout), requires_grad=True)
            p[f"b{l}.fgn0.w"] = Tensor(
                rng.normal(0.0, np.sqrt(2.0 / cfg.edge_feature_len), (h1, cfg.edge_feature_len)),
                requires_grad=True)
            p[f"b{l}.fgn0.b"] = Tensor(np.zeros(h1), requires_grad=True)
            p[f"b{l}.fgn1.w"] = Tensor(
                rng.normal(0.0, np.sqrt(2.0 / h1), (h2, h1)), requires_grad=True)
            p[f"b{l}.fgn1.b"] = Tensor(np.zeros(h2), requires_grad=True)
            # small last-layer init keeps the initial edge filters gentle
            p[f"b{l}.fgn2.w"] = Tensor(
                rng.normal(0.0, 0.1 * np.sqrt(2.0 / h2), (dout * din, h2)), requires_grad=True)
            p[f"b{l}.fgn2.b"] = Tensor(np.zeros(dout * din), requires_grad=True)
            p[f"b{l}.bn.gamma"] = Tensor(np.ones(dout), requires_grad=True)
            p[f"b{l}.bn.beta"] = Tensor(np.zeros(dout), requires_grad=True)
            self.bn_states.append(BnState(dout))
            din = dout
        self.params = p

    def forward(self, node_feats, nbr_idx, edge_feats, training: bool = False) -> Tensor:
        p = self.params
        n_b, k = nbr_idx.shape
        h = node_feats if isinstance(node_feats, Tensor) else Tensor(node_feats)
        e = Tensor(np.asarray(edge_feats, np.float64).reshape(n_b * k, -1))
        din = h.data.shape[1]
        for l, dout in enumerate(self.cfg.block_depths):
            f = T.relu(T.linear(e, p[f"b{l}.fgn0.w"], p[f"b{l}.fgn0.b"]))
            f = T.relu(T.linear(f, p[f"b{l}.fgn1.w"], p[f"b{l}.fgn1.b"]))
            f = T.linear(f, p[f"b{l}.fgn2.w"], p[f"b{l}.fgn2.b"])
            theta = T.reshape(f, (n_b, k, dout, din))
            z = T.add(T.ecc_aggregate(h, theta, nbr_idx),
                      T.linear(h, p[f"b{l}.root.w"], p[f"b{l}.root.b"]))
            z = T.batchnorm(z, p[f"b{l}.bn.gamma"], p[f"b{l}.bn.beta"],
                            self.bn_states[l], training)
            h = T.relu(z) if l < len(self.cfg.block_depths) - 1 else z
            din = dout
        return h

    def forward_graph(self, graph, training: bool = False) -> Tensor:
        return self.forward(graph.node_feats, graph.nbr_idx, graph.edge_feats, training)

    def logits(self, graph) -> np.ndarray:
        return self.forward_graph(graph, training=False).data

    def state_arrays(self):
        out = {}
        for l, st in enumerate(self.bn_states):
            out[f"b{l}.bn.running_mean"] = st.mean
            out[f"b{l}.bn.running_var"] = st.var
        return out

    def load_state_arrays(self, arrays):
        for l, st in enumerate(self.bn_states):
            st.mean = arrays[f"b{l}.bn.running_mean"].copy()
            st.var = arrays[f"b{l}.bn.running_var"].copy()

    def config_doc(self):
        return {"block_depths": list(self.cfg.block_depths),
                "fgn_hidden": list(self.cfg.fgn_hidden),
                "node_feature_len": self.cfg.node_feature_len,
                "edge_feature_len": self.cfg.edge_feature_len}


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(model, path) -> None:
    arrays = {f"param/{k}": v.data for k, v in model.params.items()}
    arrays.update({f"state/{k}": v for k, v in model.state_arrays().items()})
    meta = {"version": CHECKPOINT_VERSION, "kind": model.kind,
            "config": model.config_doc()}
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), np.uint8),
                 **arrays)


def load_checkpoint(path):
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        cfg = meta["config"]
        if meta["kind"] == "encdec":
            model = EncDec(EncDecConfig(**cfg))
        elif meta["kind"] == "ecc":
            model = EccNet(EccConfig(
                block_depths=tuple(cfg["block_depths"]),
                fgn_hidden=tuple(cfg["fgn_hidden"]),
                node_feature_len=cfg["node_feature_len"],
                edge_feature_len=cfg["edge_feature_len"]))
        else:
            raise ValueError(f"unknown checkpoint kind {meta['kind']!r}")
        states = {}
        for key in data.files:
            if key.startswith("param/"):
                name = key[6:]
                if name not in model.params or model.params[name].data.shape != data[key].shape:
                    raise ValueError(f"checkpoint parameter mismatch at {name!r}")
                model.params[name].data = data[key].astype(np.float64)
            elif key.startswith("state/"):
                states[key[6:]] = data[key]
        if states:
            model.load_state_arrays(states)
    return model


def model_fingerprint(model) -> str:
    """Stable content hash of parameters and running state."""
    h = hashlib.sha256()
    for k in sorted(model.params):
        h.update(k.encode())
        h.update(model.params[k].data.tobytes())
    for k, v in sorted(model.state_arrays().items()):
        h.update(k.encode())
        h.update(np.asarray(v).tobytes())
    return h.hexdigest()[:16]


def clone_params(model) -> dict:
    return {k: v.data.copy() for k, v in model.params.items()}


def load_params(model, snapshot: dict) -> None:
    for k, v in snapshot.items():
        model.params[k].data = v.copy()
