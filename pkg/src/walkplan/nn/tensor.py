"""Minimal reverse-mode autodiff over float64 numpy arrays.

Tensors wrap a value array plus a lazily filled gradient slot; every op
returns a tensor holding a closure that maps the output gradient to parent
gradients. backward() replays the tape in reverse topological order.
"""

from __future__ import annotations

import numpy as np

from .. import accel

_nan_guard = False


def set_nan_guard(enabled: bool) -> None:
    """Raise on non-finite forward values (debug aid, off by default)."""
    global _nan_guard
    _nan_guard = bool(enabled)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_bw")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, np.float64)
        self.requires_grad = requires_grad
        self.grad = None
        self._parents = ()
        self._bw = None

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"


def _result(data, parents, bw) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._bw = bw
    if _nan_guard and not np.all(np.isfinite(out.data)):
        raise FloatingPointError("non-finite values in forward pass")
    return out


def backward(loss: Tensor) -> None:
    if loss.data.size != 1:
        raise ValueError("backward() needs a scalar loss")
    topo = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            stack.append((p, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._bw is None:
            continue
        for p, g in zip(node._parents, node._bw(node.grad)):
            if g is None or not p.requires_grad:
                continue
            if p.grad is None:
                p.grad = np.zeros_like(p.data)
            p.grad += g


def zero_grads(params) -> None:
    values = params.values() if isinstance(params, dict) else params
    for p in values:
        p.grad = None


# ---------------------------------------------------------------------------
# elementwise / shape ops


def relu(x: Tensor) -> Tensor:
    gate = x.data > 0
    return _result(np.where(gate, x.data, 0.0), (x,), lambda g: (g * gate,))


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ValueError("add expects matching shapes")
    return _result(a.data + b.data, (a, b), lambda g: (g, g))


def reshape(x: Tensor, shape) -> Tensor:
    old = x.data.shape
    return _result(x.data.reshape(shape), (x,), lambda g: (g.reshape(old),))


def transpose(x: Tensor, axes) -> Tensor:
    inv = np.argsort(axes)
    return _result(x.data.transpose(axes), (x,), lambda g: (g.transpose(inv),))


def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    ca = a.data.shape[1]
    data = np.concatenate([a.data, b.data], axis=1)
    return _result(data, (a, b), lambda g: (g[:, :ca], g[:, ca:]))


def weighted_sum(x: Tensor, weights: np.ndarray) -> Tensor:
    """Scalar projection sum(x * weights); the gradient-check probe."""
    w = np.asarray(weights, np.float64)
    return _result((x.data * w).sum(), (x,), lambda g: (g * w,))


# ---------------------------------------------------------------------------
# dense / conv layers


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    y = x.data @ w.data.T
    if b is not None:
        y = y + b.data

    def bw(g):
        gx = g @ w.data
        gw = g.T @ x.data
        gb = g.sum(axis=0) if b is not None else None
        return (gx, gw, gb) if b is not None else (gx, gw)

    return _result(y, (x, w, b) if b is not None else (x, w), bw)


def conv3x3(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    if x.data.ndim != 4 or x.data.shape[1] != w.data.shape[1]:
        raise ValueError("conv3x3 shape mismatch")
    y = accel.conv3x3_fw(x.data, w.data, b.data)

    def bw(g):
        return accel.conv3x3_bw(x.data, w.data, np.ascontiguousarray(g))

    return _result(y, (x, w, b), bw)


def convt2(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    if x.data.shape[1] != w.data.shape[0]:
        raise ValueError("convt2 shape mismatch")
    y = accel.convt2_fw(x.data, w.data, b.data)

    def bw(g):
        return accel.convt2_bw(x.data, w.data, np.ascontiguousarray(g))

    return _result(y, (x, w, b), bw)


def conv1x1(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    y = np.einsum("bchw,fc->bfhw", x.data, w.data, optimize=True)
    y += b.data[None, :, None, None]

    def bw(g):
        gx = np.einsum("bfhw,fc->bchw", g, w.data, optimize=True)
        gw = np.einsum("bfhw,bchw->fc", g, x.data, optimize=True)
        return gx, gw, g.sum(axis=(0, 2, 3))

    return _result(y, (x, w, b), bw)


def maxpool2(x: Tensor) -> Tensor:
    y, idx = accel.maxpool2_fw(x.data)

    def bw(g):
        return (accel.maxpool2_bw(np.ascontiguousarray(g), idx),)

    return _result(y, (x,), bw)


# ---------------------------------------------------------------------------
# batch normalization (over axis 0 of an (N, F) tensor)


class BnState:
    """Running statistics, updated outside the autodiff tape."""

    def __init__(self, features: int, momentum: float = 0.9, eps: float = 1e-5):
        self.mean = np.zeros(features, np.float64)
        self.var = np.ones(features, np.float64)
        self.momentum = momentum
        self.eps = eps


def batchnorm(x: Tensor, gamma: Tensor, beta: Tensor, state: BnState,
              training: bool) -> Tensor:
    if training:
        n = x.data.shape[0]
        mu = x.data.mean(axis=0)
        var = x.data.var(axis=0)
        ivar = 1.0 / np.sqrt(var + state.eps)
        xhat = (x.data - mu) * ivar
        unbiased = var * (n / (n - 1)) if n > 1 else var
        state.mean = state.momentum * state.mean + (1 - state.momentum) * mu
        state.var = state.momentum * state.var + (1 - state.momentum) * unbiased

        def bw(g):
            ggamma = (g * xhat).sum(axis=0)
            gbeta = g.sum(axis=0)
            gxhat = g * gamma.data
            gx = (ivar / n) * (
                n * gxhat - gxhat.sum(axis=0) - xhat * (gxhat * xhat).sum(axis=0)
            )
            return gx, ggamma, gbeta

    else:
        ivar = 1.0 / np.sqrt(state.var + state.eps)
        xhat = (x.data - state.mean) * ivar

        def bw(g):
            return g * gamma.data * ivar, (g * xhat).sum(axis=0), g.sum(axis=0)

    return _result(gamma.data * xhat + beta.data, (x, gamma, beta), bw)


# ---------------------------------------------------------------------------
# graph aggregation and loss


def ecc_aggregate(h: Tensor, theta: Tensor, nbr_idx: np.ndarray) -> Tensor:
    """Mean over each node's neighbors of the edge-generated linear maps.

    h: (N, Din) node features; theta: (N, K, Dout, Din) per-edge matrices;
    nbr_idx: (N, K) int neighbor ids. Output (N, Dout).
    """
    n, k = nbr_idx.shape
    if nbr_idx.max() >= h.data.shape[0]:
        raise ValueError("dangling edge reference")
    hn = h.data[nbr_idx]  # (N, K, Din)
    y = np.einsum("nkoi,nki->no", theta.data, hn, optimize=True) / k

    def bw(g):
        gtheta = np.einsum("no,nki->nkoi", g, hn, optimize=True) / k
        ghn = np.einsum("no,nkoi->nki", g, theta.data, optimize=True) / k
        gh = np.zeros_like(h.data)
        np.add.at(gh, nbr_idx, ghn)
        return gh, gtheta

    return _result(y, (h, theta), bw)


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    z = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def cross_entropy(logits: Tensor, targets: np.ndarray,
                  mask: np.ndarray | None = None,
                  class_weights: np.ndarray | None = None) -> Tensor:
    """Weighted-mean negative log likelihood over (N, K) logits."""
    n, k = logits.data.shape
    t = np.asarray(targets, np.int64)
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    logp = z[np.arange(n), t] - lse
    w = np.ones(n) if class_weights is None else np.asarray(class_weights, np.float64)[t]
    if mask is not None:
        w = w * np.asarray(mask, np.float64).ravel()
    denom = w.sum()
    if denom <= 0:
        return _result(np.zeros(()), (logits,), lambda g: (np.zeros_like(logits.data),))
    loss = -(w * logp).sum() / denom

    def bw(g):
        p = softmax(logits.data, axis=1)
        p[np.arange(n), t] -= 1.0
        return (p * (w / denom)[:, None] * g,)

    return _result(np.asarray(loss), (logits,), bw)


# ---------------------------------------------------------------------------
# finite-difference oracle


def finite_diff_check(params, loss_fn, step: float = 1e-5) -> float:
    """Max over parameters of the scale-relative gradient error.

    Per parameter tensor: max|analytic - central difference| divided by the
    larger of the two gradients' max magnitudes (floored at 1e-8).
    """
    zero_grads(params)
    backward(loss_fn())
    worst = 0.0
    for p in params.values():
        analytic = p.grad.copy() if p.grad is not None else np.zeros_like(p.data)
        flat = p.data.ravel()
        fd = np.zeros(flat.size)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = float(loss_fn().data)
            flat[i] = orig - step
            dn = float(loss_fn().data)
            flat[i] = orig
            fd[i] = (up - dn) / (2 * step)
        scale = max(np.abs(analytic).max(initial=0.0), np.abs(fd).max(initial=0.0), 1e-8)
        worst = max(worst, np.abs(analytic.ravel() - fd).max(initial=0.0) / scale)
    return worst
