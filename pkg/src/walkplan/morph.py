"""Binary mask morphology on the cell grid. Outside the grid counts as 0."""

import numpy as np

_N4 = ((-1, 0), (1, 0), (0, -1), (0, 1))
_N8 = _N4 + ((-1, -1), (-1, 1), (1, -1), (1, 1))


def label_components(mask: np.ndarray, connectivity: int = 4):
    """Connected-component labeling; returns (labels int64, count).

    Components are numbered 1..count in scan order of their first cell.
    """
    m = np.asarray(mask) > 0.5
    nbrs = _N4 if connectivity == 4 else _N8
    n_r, n_c = m.shape
    labels = np.zeros((n_r, n_c), np.int64)
    count = 0
    for r0 in range(n_r):
        for c0 in range(n_c):
            if not m[r0, c0] or labels[r0, c0]:
                continue
            count += 1
            stack = [(r0, c0)]
            labels[r0, c0] = count
            while stack:
                r, c = stack.pop()
                for dr, dc in nbrs:
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < n_r and 0 <= cc < n_c and m[rr, cc] and not labels[rr, cc]:
                        labels[rr, cc] = count
                        stack.append((rr, cc))
    return labels, count


def largest_component(mask: np.ndarray, connectivity: int = 4) -> np.ndarray:
    labels, count = label_components(mask, connectivity)
    if count == 0:
        return np.zeros_like(labels, np.float64)
    sizes = np.bincount(labels.ravel())[1:]
    keep = int(np.argmax(sizes)) + 1  # ties go to the first component found
    return (labels == keep).astype(np.float64)


def binary_erode(mask: np.ndarray, iterations: int = 1) -> np.ndarray:
    """3x3 (Chebyshev) erosion, repeated; cells past the border erode."""
    m = np.asarray(mask) > 0.5
    for _ in range(iterations):
        p = np.zeros((m.shape[0] + 2, m.shape[1] + 2), bool)
        p[1:-1, 1:-1] = m
        out = p[1:-1, 1:-1].copy()
        for dr, dc in _N8:
            out &= p[1 + dr:p.shape[0] - 1 + dr, 1 + dc:p.shape[1] - 1 + dc]
        m = out
    return m.astype(np.float64)


def binary_dilate(mask: np.ndarray, iterations: int = 1) -> np.ndarray:
    """3x3 (Chebyshev) dilation, repeated."""
    m = np.asarray(mask) > 0.5
    for _ in range(iterations):
        p = np.zeros((m.shape[0] + 2, m.shape[1] + 2), bool)
        p[1:-1, 1:-1] = m
        out = p[1:-1, 1:-1].copy()
        for dr, dc in _N8:
            out |= p[1 + dr:p.shape[0] - 1 + dr, 1 + dc:p.shape[1] - 1 + dc]
        m = out
    return m.astype(np.float64)


def fill_holes(mask: np.ndarray) -> np.ndarray:
    """Set to 1 every 0-region not 4-connected to the grid border."""
    m = np.asarray(mask) > 0.5
    n_r, n_c = m.shape
    outside = np.zeros((n_r, n_c), bool)
    stack = [
        (r, c)
        for r in range(n_r)
        for c in range(n_c)
        if (r in (0, n_r - 1) or c in (0, n_c - 1)) and not m[r, c]
    ]
    for r, c in stack:
        outside[r, c] = True
    while stack:
        r, c = stack.pop()
        for dr, dc in _N4:
            rr, cc = r + dr, c + dc
            if 0 <= rr < n_r and 0 <= cc < n_c and not m[rr, cc] and not outside[rr, cc]:
                outside[rr, cc] = True
                stack.append((rr, cc))
    return (m | ~outside).astype(np.float64)
