"""Scalar-loop kernel implementations.

Every function here is written in nopython-compatible style (numpy arrays,
ints, floats, while/for loops only) so the numba backend can compile the
exact same source. The numpy backend reuses the graph kernels as-is and
replaces the array-parallel ones with vectorized equivalents.
"""

import numpy as np

_EPS = 1e-12


def conv3x3_fw(x, w, b):
    B, C, H, W = x.shape
    F = w.shape[0]
    y = np.empty((B, F, H, W), np.float64)
    for bb in range(B):
        for f in range(F):
            for i in range(H):
                for j in range(W):
                    acc = b[f]
                    for c in range(C):
                        for di in range(3):
                            ii = i + di - 1
                            if ii < 0 or ii >= H:
                                continue
                            for dj in range(3):
                                jj = j + dj - 1
                                if 0 <= jj < W:
                                    acc += w[f, c, di, dj] * x[bb, c, ii, jj]
                    y[bb, f, i, j] = acc
    return y


def conv3x3_bw(x, w, gy):
    B, C, H, W = x.shape
    F = w.shape[0]
    gx = np.zeros((B, C, H, W), np.float64)
    gw = np.zeros(w.shape, np.float64)
    gb = np.zeros(F, np.float64)
    for bb in range(B):
        for f in range(F):
            for i in range(H):
                for j in range(W):
                    g = gy[bb, f, i, j]
                    gb[f] += g
                    for c in range(C):
                        for di in range(3):
                            ii = i + di - 1
                            if ii < 0 or ii >= H:
                                continue
                            for dj in range(3):
                                jj = j + dj - 1
                                if 0 <= jj < W:
                                    gw[f, c, di, dj] += g * x[bb, c, ii, jj]
                                    gx[bb, c, ii, jj] += g * w[f, c, di, dj]
    return gx, gw, gb


def convt2_fw(x, w, b):
    # 2x2 transposed convolution with stride 2: non-overlapping upsampling.
    B, C, H, W = x.shape
    F = w.shape[1]
    y = np.empty((B, F, 2 * H, 2 * W), np.float64)
    for bb in range(B):
        for f in range(F):
            for i in range(H):
                for j in range(W):
                    for di in range(2):
                        for dj in range(2):
                            acc = b[f]
                            for c in range(C):
                                acc += w[c, f, di, dj] * x[bb, c, i, j]
                            y[bb, f, 2 * i + di, 2 * j + dj] = acc
    return y


def convt2_bw(x, w, gy):
    B, C, H, W = x.shape
    F = w.shape[1]
    gx = np.zeros((B, C, H, W), np.float64)
    gw = np.zeros(w.shape, np.float64)
    gb = np.zeros(F, np.float64)
    for bb in range(B):
        for f in range(F):
            for i in range(H):
                for j in range(W):
                    for di in range(2):
                        for dj in range(2):
                            g = gy[bb, f, 2 * i + di, 2 * j + dj]
                            gb[f] += g
                            for c in range(C):
                                gw[c, f, di, dj] += g * x[bb, c, i, j]
                                gx[bb, c, i, j] += g * w[c, f, di, dj]
    return gx, gw, gb


def maxpool2_fw(x):
    B, C, H, W = x.shape
    h, w = H // 2, W // 2
    y = np.empty((B, C, h, w), np.float64)
    idx = np.empty((B, C, h, w), np.uint8)
    for bb in range(B):
        for c in range(C):
            for i in range(h):
                for j in range(w):
                    best = x[bb, c, 2 * i, 2 * j]
                    k = 0
                    for di in range(2):
                        for dj in range(2):
                            v = x[bb, c, 2 * i + di, 2 * j + dj]
                            if v > best:
                                best = v
                                k = 2 * di + dj
                    y[bb, c, i, j] = best
                    idx[bb, c, i, j] = k
    return y, idx


def maxpool2_bw(gy, idx):
    B, C, h, w = gy.shape
    gx = np.zeros((B, C, 2 * h, 2 * w), np.float64)
    for bb in range(B):
        for c in range(C):
            for i in range(h):
                for j in range(w):
                    k = idx[bb, c, i, j]
                    gx[bb, c, 2 * i + k // 2, 2 * j + k % 2] = gy[bb, c, i, j]
    return gx


def polyline_point_dists(pts, poly):
    # Min Euclidean distance from each point to any polyline segment.
    P = pts.shape[0]
    M = poly.shape[0]
    out = np.empty(P, np.float64)
    for p in range(P):
        px = pts[p, 0]
        py = pts[p, 1]
        best = (px - poly[0, 0]) ** 2 + (py - poly[0, 1]) ** 2
        for s in range(M - 1):
            ax = poly[s, 0]
            ay = poly[s, 1]
            dx = poly[s + 1, 0] - ax
            dy = poly[s + 1, 1] - ay
            L2 = dx * dx + dy * dy
            if L2 > 0.0:
                t = ((px - ax) * dx + (py - ay) * dy) / L2
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            else:
                t = 0.0
            ex = px - (ax + t * dx)
            ey = py - (ay + t * dy)
            d2 = ex * ex + ey * ey
            if d2 < best:
                best = d2
        out[p] = np.sqrt(best)
    return out


def nearest_occupied_dist(occ):
    # Euclidean cell-center distance to the nearest occupied cell, in cells.
    n_r, n_c = occ.shape
    k = 0
    for r in range(n_r):
        for c in range(n_c):
            if occ[r, c] != 0:
                k += 1
    rows = np.empty(k, np.int64)
    cols = np.empty(k, np.int64)
    k = 0
    for r in range(n_r):
        for c in range(n_c):
            if occ[r, c] != 0:
                rows[k] = r
                cols[k] = c
                k += 1
    out = np.empty((n_r, n_c), np.float64)
    if k == 0:
        out[:] = np.inf
        return out
    for r in range(n_r):
        for c in range(n_c):
            best = 1e18
            for t in range(k):
                dr = float(r - rows[t])
                dc = float(c - cols[t])
                d2 = dr * dr + dc * dc
                if d2 < best:
                    best = d2
            out[r, c] = np.sqrt(best)
    return out


def grid_dijkstra(passable, sr, sc, tr, tc):
    """Min-cost path on the 8-connected grid, steps cost 1 / sqrt(2).

    Returns a (k, 2) int64 array of cells from (sr, sc) to (tr, tc), or a
    (0, 2) array when the target is unreachable.
    """
    n_r, n_c = passable.shape
    nn = n_r * n_c
    src = sr * n_c + sc
    dst = tr * n_c + tc
    INF = 1e18
    dist = np.full(nn, INF, np.float64)
    prev = np.full(nn, -1, np.int64)
    done = np.zeros(nn, np.uint8)
    cap = 16 * nn + 16
    hkey = np.empty(cap, np.float64)
    hval = np.empty(cap, np.int64)
    hn = 0
    # push source
    hkey[0] = 0.0
    hval[0] = src
    hn = 1
    dist[src] = 0.0
    sq2 = np.sqrt(2.0)
    while hn > 0:
        # pop min
        kk = hkey[0]
        node = hval[0]
        hn -= 1
        hkey[0] = hkey[hn]
        hval[0] = hval[hn]
        i = 0
        while True:
            l = 2 * i + 1
            r2 = l + 1
            small = i
            if l < hn and hkey[l] < hkey[small]:
                small = l
            if r2 < hn and hkey[r2] < hkey[small]:
                small = r2
            if small == i:
                break
            hkey[i], hkey[small] = hkey[small], hkey[i]
            hval[i], hval[small] = hval[small], hval[i]
            i = small
        if done[node]:
            continue
        done[node] = 1
        if node == dst:
            break
        nr = node // n_c
        nc = node % n_c
        for dr in range(-1, 2):
            for dc in range(-1, 2):
                if dr == 0 and dc == 0:
                    continue
                r = nr + dr
                c = nc + dc
                if r < 0 or r >= n_r or c < 0 or c >= n_c:
                    continue
                if passable[r, c] == 0:
                    continue
                step = 1.0 if dr == 0 or dc == 0 else sq2
                nd = kk + step
                v = r * n_c + c
                if nd < dist[v] - 1e-12:
                    dist[v] = nd
                    prev[v] = node
                    # push
                    j = hn
                    hkey[j] = nd
                    hval[j] = v
                    hn += 1
                    while j > 0:
                        par = (j - 1) // 2
                        if hkey[par] <= hkey[j]:
                            break
                        hkey[par], hkey[j] = hkey[j], hkey[par]
                        hval[par], hval[j] = hval[j], hval[par]
                        j = par
    if dist[dst] >= INF:
        return np.empty((0, 2), np.int64)
    # walk back
    length = 1
    v = dst
    while v != src:
        v = prev[v]
        length += 1
    path = np.empty((length, 2), np.int64)
    v = dst
    for t in range(length - 1, -1, -1):
        path[t, 0] = v // n_c
        path[t, 1] = v % n_c
        v = prev[v]
    return path


def maxflow_binary(cap_src, cap_snk, gamma):
    """Exact binary MRF labeling by min-cut (Dinic).

    cap_src[r, c] is the cost of labeling cell (r, c) 0, cap_snk the cost of
    labeling it 1; gamma is the 4-neighbor disagreement cost. Returns the
    uint8 label map (1 = source side).
    """
    n_r, n_c = cap_src.shape
    nn = n_r * n_c
    S = nn
    T = nn + 1
    n_nodes = nn + 2
    n_entries = 4 * nn + 2 * (n_r * (n_c - 1) + (n_r - 1) * n_c)
    to = np.empty(n_entries, np.int64)
    cap = np.empty(n_entries, np.float64)
    nxt = np.empty(n_entries, np.int64)
    head = np.full(n_nodes, -1, np.int64)
    ne = 0
    for r in range(n_r):
        for c in range(n_c):
            v = r * n_c + c
            # S -> v
            to[ne] = v
            cap[ne] = cap_src[r, c]
            nxt[ne] = head[S]
            head[S] = ne
            ne += 1
            to[ne] = S
            cap[ne] = 0.0
            nxt[ne] = head[v]
            head[v] = ne
            ne += 1
            # v -> T
            to[ne] = T
            cap[ne] = cap_snk[r, c]
            nxt[ne] = head[v]
            head[v] = ne
            ne += 1
            to[ne] = v
            cap[ne] = 0.0
            nxt[ne] = head[T]
            head[T] = ne
            ne += 1
    for r in range(n_r):
        for c in range(n_c):
            v = r * n_c + c
            if c + 1 < n_c:
                u = v + 1
                to[ne] = u
                cap[ne] = gamma
                nxt[ne] = head[v]
                head[v] = ne
                ne += 1
                to[ne] = v
                cap[ne] = gamma
                nxt[ne] = head[u]
                head[u] = ne
                ne += 1
            if r + 1 < n_r:
                u = v + n_c
                to[ne] = u
                cap[ne] = gamma
                nxt[ne] = head[v]
                head[v] = ne
                ne += 1
                to[ne] = v
                cap[ne] = gamma
                nxt[ne] = head[u]
                head[u] = ne
                ne += 1

    level = np.empty(n_nodes, np.int64)
    queue = np.empty(n_nodes, np.int64)
    it = np.empty(n_nodes, np.int64)
    path_arc = np.empty(n_nodes, np.int64)
    while True:
        # BFS levels on the residual graph
        level[:] = -1
        level[S] = 0
        queue[0] = S
        qh = 0
        qt = 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            e = head[u]
            while e != -1:
                v = to[e]
                if cap[e] > _EPS and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
                e = nxt[e]
        if level[T] < 0:
            break
        for i in range(n_nodes):
            it[i] = head[i]
        # blocking flow
        while True:
            v = S
            depth = 0
            found = False
            while True:
                if v == T:
                    found = True
                    break
                e = it[v]
                advanced = False
                while e != -1:
                    u = to[e]
                    if cap[e] > _EPS and level[u] == level[v] + 1:
                        advanced = True
                        break
                    e = nxt[e]
                    it[v] = e
                if advanced:
                    path_arc[depth] = e
                    depth += 1
                    v = to[e]
                else:
                    level[v] = -1
                    if depth == 0:
                        break
                    depth -= 1
                    v = to[path_arc[depth] ^ 1]
            if not found:
                break
            f = cap[path_arc[0]]
            for t in range(1, depth):
                if cap[path_arc[t]] < f:
                    f = cap[path_arc[t]]
            for t in range(depth):
                e = path_arc[t]
                cap[e] -= f
                cap[e ^ 1] += f
    # source side = reachable in residual
    labels = np.zeros((n_r, n_c), np.uint8)
    seen = np.zeros(n_nodes, np.uint8)
    seen[S] = 1
    queue[0] = S
    qh = 0
    qt = 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        e = head[u]
        while e != -1:
            v = to[e]
            if cap[e] > _EPS and seen[v] == 0:
                seen[v] = 1
                queue[qt] = v
                qt += 1
            e = nxt[e]
    for r in range(n_r):
        for c in range(n_c):
            if seen[r * n_c + c]:
                labels[r, c] = 1
    return labels
