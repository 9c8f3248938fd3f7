"""Kernel backend selection.

The hot kernels exist twice: a numba @njit build of the scalar loops and a
vectorized pure-numpy fallback. ``WALKPLAN_BACKEND`` picks the path:

* ``auto`` (default) — per-kernel choice: graph/geometry kernels run the
  numba build (orders of magnitude faster than interpreted loops), the
  convolution kernels run the numpy/BLAS build (faster than single-core
  jitted loops, see benchmarks/bench_kernels.py). Falls back to numpy
  everywhere if numba is unavailable.
* ``numba`` — force the numba build for every kernel.
* ``numpy`` — force the pure-numpy fallback for every kernel.
"""

import os

from . import _numpy

_MODE = os.environ.get("WALKPLAN_BACKEND", "auto").lower()
if _MODE not in ("auto", "numba", "numpy"):
    raise ValueError(f"WALKPLAN_BACKEND must be auto|numba|numpy, got {_MODE!r}")

_nb = None
if _MODE != "numpy":
    try:
        from . import _numba as _nb
    except ImportError:
        if _MODE == "numba":
            raise

HAVE_NUMBA = _nb is not None
BACKEND = "numpy" if _nb is None else _MODE

# auto mode: True where the jitted loops beat the vectorized fallback
_PREFER_NUMBA = {
    "conv3x3_fw": False,
    "conv3x3_bw": False,
    "convt2_fw": False,
    "convt2_bw": False,
    "maxpool2_fw": False,
    "maxpool2_bw": False,
    "polyline_point_dists": True,
    "nearest_occupied_dist": True,
    "grid_dijkstra": True,
    "maxflow_binary": True,
}


def _pick(name):
    if _nb is None or _MODE == "numpy":
        return getattr(_numpy, name)
    if _MODE == "numba" or _PREFER_NUMBA[name]:
        return getattr(_nb, name)
    return getattr(_numpy, name)


conv3x3_fw = _pick("conv3x3_fw")
conv3x3_bw = _pick("conv3x3_bw")
convt2_fw = _pick("convt2_fw")
convt2_bw = _pick("convt2_bw")
maxpool2_fw = _pick("maxpool2_fw")
maxpool2_bw = _pick("maxpool2_bw")
polyline_point_dists = _pick("polyline_point_dists")
nearest_occupied_dist = _pick("nearest_occupied_dist")
grid_dijkstra = _pick("grid_dijkstra")
maxflow_binary = _pick("maxflow_binary")
