"""Pure-numpy kernel backend.

Array-parallel kernels are vectorized (the convolutions reduce to BLAS
matmuls via im2col views); the sequential graph kernels are reused from
``_loops`` uncompiled.
"""

import numpy as np
from numpy.lib.stride_tricks import as_strided

from ._loops import grid_dijkstra, maxflow_binary  # noqa: F401

_PT_CHUNK = 1024


def _col_view(xp, H, W):
    # (C, 3, 3, H, W) sliding view over a padded (C, H+2, W+2) image.
    C = xp.shape[0]
    sc, sh, sw = xp.strides
    return as_strided(xp, (C, 3, 3, H, W), (sc, sh, sw, sh, sw))


def conv3x3_fw(x, w, b):
    B, C, H, W = x.shape
    F = w.shape[0]
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    wm = w.reshape(F, C * 9)
    y = np.empty((B, F, H, W), np.float64)
    for bb in range(B):
        cols = _col_view(xp[bb], H, W).reshape(C * 9, H * W)
        y[bb] = (wm @ cols).reshape(F, H, W)
    y += b[None, :, None, None]
    return y


def conv3x3_bw(x, w, gy):
    B, C, H, W = x.shape
    F = w.shape[0]
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    wm = w.reshape(F, C * 9)
    gw = np.zeros((F, C * 9), np.float64)
    gxp = np.zeros_like(xp)
    for bb in range(B):
        cols = _col_view(xp[bb], H, W).reshape(C * 9, H * W)
        gym = gy[bb].reshape(F, H * W)
        gw += gym @ cols.T
        gcols = (wm.T @ gym).reshape(C, 3, 3, H, W)
        for di in range(3):
            for dj in range(3):
                gxp[bb, :, di:di + H, dj:dj + W] += gcols[:, di, dj]
    gx = gxp[:, :, 1:-1, 1:-1]
    gb = gy.sum(axis=(0, 2, 3))
    return np.ascontiguousarray(gx), gw.reshape(w.shape), gb


def convt2_fw(x, w, b):
    B, C, H, W = x.shape
    F = w.shape[1]
    y = np.tensordot(x, w, axes=([1], [0]))        # (B, H, W, F, 2, 2)
    y = y.transpose(0, 3, 1, 4, 2, 5).reshape(B, F, 2 * H, 2 * W)
    return y + b[None, :, None, None]


def convt2_bw(x, w, gy):
    B, C, H, W = x.shape
    F = w.shape[1]
    gyr = gy.reshape(B, F, H, 2, W, 2).transpose(0, 2, 4, 1, 3, 5)  # (B,H,W,F,2,2)
    gx = np.tensordot(gyr, w, axes=([3, 4, 5], [1, 2, 3]))          # (B,H,W,C)
    gx = np.ascontiguousarray(gx.transpose(0, 3, 1, 2))
    gw = np.tensordot(x, gyr, axes=([0, 2, 3], [0, 1, 2]))          # (C,F,2,2)
    gb = gy.sum(axis=(0, 2, 3))
    return gx, gw, gb


def maxpool2_fw(x):
    B, C, H, W = x.shape
    h, w = H // 2, W // 2
    xr = x.reshape(B, C, h, 2, w, 2).transpose(0, 1, 2, 4, 3, 5).reshape(B, C, h, w, 4)
    idx = xr.argmax(axis=-1).astype(np.uint8)
    y = np.take_along_axis(xr, idx[..., None].astype(np.int64), axis=-1)[..., 0]
    return y, idx


def maxpool2_bw(gy, idx):
    B, C, h, w = gy.shape
    gxr = np.zeros((B, C, h, w, 4), np.float64)
    np.put_along_axis(gxr, idx[..., None].astype(np.int64), gy[..., None], axis=-1)
    gx = gxr.reshape(B, C, h, w, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(B, C, 2 * h, 2 * w)
    return gx


def polyline_point_dists(pts, poly):
    P = pts.shape[0]
    if poly.shape[0] == 1:
        return np.hypot(pts[:, 0] - poly[0, 0], pts[:, 1] - poly[0, 1])
    a = poly[:-1]
    d = poly[1:] - a
    L2 = (d * d).sum(axis=1)
    L2safe = np.where(L2 > 0.0, L2, 1.0)
    out = np.empty(P, np.float64)
    for lo in range(0, P, _PT_CHUNK):
        hi = min(lo + _PT_CHUNK, P)
        q = pts[lo:hi, None, :] - a[None, :, :]
        t = np.clip((q * d[None, :, :]).sum(axis=2) / L2safe[None, :], 0.0, 1.0)
        t = np.where(L2[None, :] > 0.0, t, 0.0)
        e = q - t[:, :, None] * d[None, :, :]
        out[lo:hi] = np.sqrt((e * e).sum(axis=2).min(axis=1))
    return out


def nearest_occupied_dist(occ):
    n_r, n_c = occ.shape
    rows, cols = np.nonzero(occ)
    out = np.empty((n_r, n_c), np.float64)
    if rows.size == 0:
        out[:] = np.inf
        return out
    rr, cc = np.meshgrid(np.arange(n_r), np.arange(n_c), indexing="ij")
    cells = np.stack([rr.ravel(), cc.ravel()], axis=1).astype(np.float64)
    occ_pts = np.stack([rows, cols], axis=1).astype(np.float64)
    flat = np.empty(n_r * n_c, np.float64)
    for lo in range(0, cells.shape[0], _PT_CHUNK):
        hi = min(lo + _PT_CHUNK, cells.shape[0])
        diff = cells[lo:hi, None, :] - occ_pts[None, :, :]
        flat[lo:hi] = np.sqrt((diff * diff).sum(axis=2).min(axis=1))
    return flat.reshape(n_r, n_c)
