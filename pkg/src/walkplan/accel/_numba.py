"""Numba backend: the loop kernels from ``_loops`` compiled with @njit."""

from numba import njit

from . import _loops

_jit = njit(cache=True, nogil=True)

conv3x3_fw = _jit(_loops.conv3x3_fw)
conv3x3_bw = _jit(_loops.conv3x3_bw)
convt2_fw = _jit(_loops.convt2_fw)
convt2_bw = _jit(_loops.convt2_bw)
maxpool2_fw = _jit(_loops.maxpool2_fw)
maxpool2_bw = _jit(_loops.maxpool2_bw)
polyline_point_dists = _jit(_loops.polyline_point_dists)
nearest_occupied_dist = _jit(_loops.nearest_occupied_dist)
grid_dijkstra = _jit(_loops.grid_dijkstra)
maxflow_binary = _jit(_loops.maxflow_binary)
