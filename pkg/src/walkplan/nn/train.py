"""ADAM training with cross-entropy, validation snapshots, and the
two-phase easy-then-hard curriculum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import GraphSample, ImageSample, augment_image
from . import tensor as T
from .models import clone_params, load_params
from .tensor import Tensor, backward, cross_entropy, zero_grads


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"loss diverged at epoch {epoch}")
        self.epoch = epoch


@dataclass
class TrainConfig:
    lr: float = 0.005
    beta1: float = 0.5
    beta2: float = 0.999
    epochs: int = 50
    batch_size: int = 16
    seed: int = 0
    augment: bool = False
    inverse_freq_weights: bool = False

    def __post_init__(self):
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("decay rates must lie in (0, 1)")


class Adam:
    def __init__(self, params: dict, lr: float, beta1: float = 0.5,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for k, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            mhat = self.m[k] / (1 - b1 ** self.t)
            vhat = self.v[k] / (1 - b2 ** self.t)
            p.data -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def _inverse_freq(samples, n_classes: int = 2) -> np.ndarray:
    counts = np.zeros(n_classes)
    for s in samples:
        y = s.labels if isinstance(s, GraphSample) else s.y
        m = None if isinstance(s, GraphSample) else s.mask
        vals = y.ravel() if m is None else y[m > 0.5]
        counts += np.bincount(vals.ravel(), minlength=n_classes)
    counts = np.maximum(counts, 1.0)
    w = counts.sum() / (n_classes * counts)
    return w / w.mean()


def _image_loss(model, batch, weights, training, rng, augment):
    xs, ys, ms = [], [], []
    for s in batch:
        x, y, m = s.x, s.y, s.mask
        if augment:
            k = int(rng.integers(4))
            fh = bool(rng.integers(2))
            fv = bool(rng.integers(2))
            x, y, m = augment_image(x, y, m, k, fh, fv)
        xs.append(x)
        ys.append(y)
        ms.append(m)
    xb = np.stack(xs)
    logits = model.forward(Tensor(xb), training=training)
    k = logits.data.shape[1]
    flat = T.reshape(T.transpose(logits, (0, 2, 3, 1)), (-1, k))
    targets = np.stack(ys).ravel()
    mask = None if ms[0] is None else np.stack(ms).ravel()
    loss = cross_entropy(flat, targets, mask=mask, class_weights=weights)
    pred = flat.data.argmax(axis=1)
    sel = np.ones_like(targets, bool) if mask is None else mask > 0.5
    return loss, int((pred[sel] == targets[sel]).sum()), int(sel.sum())


def _graph_loss(model, sample, weights, training):
    logits = model.forward(sample.node_feats, sample.nbr_idx, sample.edge_feats,
                           training=training)
    loss = cross_entropy(logits, sample.labels, class_weights=weights)
    pred = logits.data.argmax(axis=1)
    return loss, int((pred == sample.labels).sum()), len(sample.labels)


def evaluate_accuracy(model, samples) -> float:
    """Label accuracy in inference mode (masked pixels excluded)."""
    correct = 0
    total = 0
    for s in samples:
        if isinstance(s, GraphSample):
            _, c, t = _graph_loss(model, s, None, training=False)
        else:
            _, c, t = _image_loss(model, [s], None, training=False,
                                  rng=None, augment=False)
        correct += c
        total += t
    return correct / max(total, 1)


def train(model, train_samples, val_samples, cfg: TrainConfig) -> dict:
    """Optimize in place; finishes holding the best-validation snapshot."""
    if not train_samples:
        raise ValueError("empty training set")
    graph_task = isinstance(train_samples[0], GraphSample)
    rng = np.random.default_rng(cfg.seed)
    weights = _inverse_freq(train_samples) if cfg.inverse_freq_weights else None
    opt = Adam(model.params, cfg.lr, cfg.beta1, cfg.beta2)
    history = {"train_loss": [], "val_acc": []}
    best_acc = -1.0
    best_epoch = -1
    best = clone_params(model)
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train_samples))
        epoch_loss = 0.0
        steps = 0
        batch_size = 1 if graph_task else cfg.batch_size
        for lo in range(0, len(order), batch_size):
            batch = [train_samples[i] for i in order[lo:lo + batch_size]]
            if graph_task:
                loss, _, _ = _graph_loss(model, batch[0], weights, training=True)
            else:
                loss, _, _ = _image_loss(model, batch, weights, training=True,
                                         rng=rng, augment=cfg.augment)
            if not np.isfinite(loss.data):
                raise TrainingDiverged(epoch)
            zero_grads(model.params)
            backward(loss)
            opt.step()
            epoch_loss += float(loss.data)
            steps += 1
        val_acc = evaluate_accuracy(model, val_samples) if val_samples else 0.0
        history["train_loss"].append(epoch_loss / max(steps, 1))
        history["val_acc"].append(val_acc)
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best = clone_params(model)
    load_params(model, best)
    history["best_epoch"] = best_epoch
    history["best_val_acc"] = best_acc
    return history


def curriculum_train(model, easy_set, hard_set, cfg_easy: TrainConfig,
                     cfg_hard: TrainConfig) -> dict:
    """Train on simple footprints first, then on the harder corpus.

    easy_set / hard_set are (train_samples, val_samples) pairs; an empty or
    None easy set reduces to plain training on the hard set.
    """
    if easy_set is None or not easy_set[0]:
        return {"phase1": None, "phase2": train(model, *hard_set, cfg_hard)}
    phase1 = train(model, *easy_set, cfg_easy)
    phase2 = train(model, *hard_set, cfg_hard)
    return {"phase1": phase1, "phase2": phase2}
