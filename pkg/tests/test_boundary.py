import numpy as np
import pytest

from walkplan.boundary import (
    BoundaryLoop,
    build_boundary_graph,
    corner_distances,
    door_runs,
    extract_boundary_loop,
    graph_to_json,
    loop_interior_mask,
    opposite_segment,
    straight_runs,
)
from walkplan.grid import boundary_segments


def mask_with(cells, n=8):
    m = np.zeros((n, n))
    for r, c in cells:
        m[r, c] = 1
    return m


def rect_mask(r0, c0, h, w, n=10):
    m = np.zeros((n, n))
    m[r0:r0 + h, c0:c0 + w] = 1
    return m


def loop_vertices(loop):
    """Polygon vertices visited by the directed loop, in order."""
    verts = []
    for (kind, r, c), (dx, dy) in zip(loop.refs, loop.headings):
        if kind == "h":
            start = (c, r) if dx > 0 else (c + 1, r)
        else:
            start = (c, r) if dy > 0 else (c, r + 1)
        verts.append(start)
    return verts


def shoelace_y_up(verts):
    """Signed area with the y axis flipped to mathematical orientation."""
    pts = [(x, -y) for x, y in verts]
    s = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        s += x0 * y1 - x1 * y0
    return 0.5 * s


class TestLoopExtraction:
    def test_single_cell(self):
        loop = extract_boundary_loop(mask_with([(2, 3)]))
        assert len(loop) == 4
        assert set(loop.refs) == {("h", 2, 3), ("h", 3, 3), ("v", 2, 3), ("v", 2, 4)}
        assert shoelace_y_up(loop_vertices(loop)) < 0

    def test_two_by_two(self):
        loop = extract_boundary_loop(rect_mask(2, 2, 2, 2, n=6))
        assert len(loop) == 8
        verts = loop_vertices(loop)
        # consecutive segments share an endpoint by construction of verts;
        # confirm closure explicitly
        closing = verts[0]
        ends = verts[1:] + [closing]
        assert len(set(loop.refs)) == 8
        assert shoelace_y_up(verts) < 0
        assert ends[-1] == closing

    def test_l_shape_clockwise_area(self):
        loop = extract_boundary_loop(mask_with([(1, 1), (2, 1), (2, 2)], n=5))
        assert len(loop) == 8
        area = shoelace_y_up(loop_vertices(loop))
        assert area == pytest.approx(-3.0)

    def test_matches_boundary_segments(self):
        m = rect_mask(1, 2, 4, 5)
        loop = extract_boundary_loop(m)
        assert set(loop.refs) == boundary_segments(m)

    def test_segment_vectors_sum_to_zero(self):
        m = mask_with([(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)], n=6)
        loop = extract_boundary_loop(m)
        assert loop.headings.sum(axis=0).tolist() == [0, 0]

    def test_two_components_rejected(self):
        m = mask_with([(1, 1), (4, 4)])
        with pytest.raises(ValueError, match="non-simple"):
            extract_boundary_loop(m)

    def test_hole_rejected(self):
        m = rect_mask(1, 1, 5, 5)
        m[3, 3] = 0
        with pytest.raises(ValueError, match="non-simple"):
            extract_boundary_loop(m)

    def test_staircase_mask(self):
        # diagonal staircase: vertices where four boundary segments meet do
        # not occur in 4-connected hole-free masks, but corners chain tightly
        m = mask_with([(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 3)], n=7)
        loop = extract_boundary_loop(m)
        assert len(loop) == len(boundary_segments(m))
        assert shoelace_y_up(loop_vertices(loop)) == pytest.approx(-6.0)

    def test_interior_mask_roundtrip(self):
        m = mask_with([(1, 1), (2, 1), (2, 2), (1, 3), (1, 2)], n=6)
        loop = extract_boundary_loop(m)
        assert (loop_interior_mask(loop) == m).all()


class TestOpposite:
    def oracle(self, loop, i):
        """Geometric oracle: first parallel segment crossed by the inward ray."""
        mids = loop.midpoints()
        orient = loop.orientations()
        inward = loop.inward_steps()  # (dr, dc)
        mx, my = mids[i]
        dr, dc = inward[i]
        best, best_t = None, np.inf
        for j in range(len(loop)):
            if j == i or orient[j] != orient[i]:
                continue
            kind, r, c = loop.refs[j]
            if kind == "h":
                t = (r - my) * dr
                if t > 0 and c < mx < c + 1 and t < best_t:
                    best, best_t = j, t
            else:
                t = (c - mx) * dc
                if t > 0 and r < my < r + 1 and t < best_t:
                    best, best_t = j, t
        return best

    def test_square_room(self):
        loop = extract_boundary_loop(rect_mask(2, 2, 4, 4))
        idx = loop.index_of()
        top = idx[("h", 2, 3)]
        assert loop.refs[opposite_segment(loop, top)] == ("h", 6, 3)

    def test_single_cell(self):
        loop = extract_boundary_loop(mask_with([(3, 3)]))
        idx = loop.index_of()
        top = idx[("h", 3, 3)]
        bottom = idx[("h", 4, 3)]
        assert opposite_segment(loop, top) == bottom

    def test_l_shape_against_oracle(self):
        m = np.zeros((8, 8))
        m[1:6, 1:6] = 1
        m[1:3, 4:6] = 0  # notch at the top-right corner
        loop = extract_boundary_loop(m)
        for i in range(len(loop)):
            assert opposite_segment(loop, i) == self.oracle(loop, i)

    def test_random_rooms_against_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            m = rect_mask(1, 1, 5, 6, n=9)
            if rng.random() < 0.8:
                h = rng.integers(1, 3)
                w = rng.integers(1, 3)
                m[1:1 + h, 7 - w:7] = 0
            loop = extract_boundary_loop(m)
            for i in range(len(loop)):
                assert opposite_segment(loop, i) == self.oracle(loop, i)


class TestCornerDistance:
    def test_square_pattern(self):
        loop = extract_boundary_loop(rect_mask(2, 2, 4, 4))
        d = corner_distances(loop)
        # every side of length 4 reads 0, 1, 1, 0
        runs = straight_runs(loop)
        for run in runs:
            assert [d[i] for i in run] == [0, 1, 1, 0]

    def test_corner_adjacent_is_zero(self):
        loop = extract_boundary_loop(rect_mask(1, 1, 3, 5))
        d = corner_distances(loop)
        o = loop.orientations()
        for i in range(len(loop)):
            if o[i] != o[i - 1]:
                assert d[i] == 0 and d[i - 1] == 0


class TestGraph:
    def test_feature_shapes_and_degree(self):
        m = rect_mask(2, 2, 5, 6)
        loop = extract_boundary_loop(m)
        walk = np.random.default_rng(0).uniform(0, 1, size=m.shape)
        g = build_boundary_graph(loop, walk)
        n_b = len(loop)
        assert g.node_feats.shape == (n_b, 14)
        assert g.nbr_idx.shape == (n_b, 3)
        assert g.edge_feats.shape == (n_b, 3, 2)

    def test_edge_orientation_dissimilarity(self):
        loop = extract_boundary_loop(rect_mask(2, 2, 4, 4))
        g = build_boundary_graph(loop, np.zeros((10, 10)))
        o = loop.orientations()
        for i in range(len(loop)):
            prev_i, next_i, opp_i = g.nbr_idx[i]
            assert g.edge_feats[i, 0, 0] == float(o[i] != o[prev_i])
            assert g.edge_feats[i, 1, 0] == float(o[i] != o[next_i])
            assert g.edge_feats[i, 2, 0] == 0.0  # opposite wall is parallel
            assert g.edge_feats[i, 2, 0] in (0.0, 1.0)

    def test_edge_l1_distance(self):
        # two horizontal segments with midpoints (2.5, 2) and (2.5, 6)
        loop = extract_boundary_loop(rect_mask(2, 2, 4, 4))
        idx = loop.index_of()
        i = idx[("h", 2, 2)]
        g = build_boundary_graph(loop, np.zeros((10, 10)))
        opp = g.nbr_idx[i, 2]
        mids = loop.midpoints()
        expect = np.abs(mids[i] - mids[opp]).sum()
        assert g.edge_feats[i, 2, 1] == pytest.approx(expect)
        assert expect == pytest.approx(4.0)

    def test_ray_starts_inside(self):
        m = rect_mask(1, 1, 6, 7)
        loop = extract_boundary_loop(m)
        walk = np.ones_like(m)
        g = build_boundary_graph(loop, walk)
        # first ray sample reads an interior cell of the all-ones walk map
        assert (g.node_feats[:, 2] == 1.0).all()

    def test_ray_zero_padded_beyond_opposite_wall(self):
        m = rect_mask(2, 2, 2, 6)  # room only 2 cells tall
        loop = extract_boundary_loop(m)
        walk = np.ones_like(m)
        g = build_boundary_graph(loop, walk)
        idx = loop.index_of()
        i = idx[("h", 2, 4)]
        ray = g.node_feats[i, 2:12]
        assert ray.tolist() == [1.0, 1.0] + [0.0] * 8

    def test_rotation_isomorphism(self):
        m = np.zeros((8, 8))
        m[1:6, 1:5] = 1
        m[1:3, 1:3] = 0
        walk = np.random.default_rng(1).uniform(size=(8, 8))
        g1 = build_boundary_graph(extract_boundary_loop(m), walk)
        g2 = build_boundary_graph(
            extract_boundary_loop(np.rot90(m).copy()), np.rot90(walk).copy()
        )
        assert len(g1.node_feats) == len(g2.node_feats)
        assert sorted(g1.corner_dists) == sorted(g2.corner_dists)
        # orientation flags swap under a quarter turn
        assert g1.node_feats[:, 1].sum() == len(g1.node_feats) - g2.node_feats[:, 1].sum()

    def test_json_dump(self):
        import json

        loop = extract_boundary_loop(rect_mask(2, 2, 3, 3))
        g = build_boundary_graph(loop, np.zeros((10, 10)))
        doc = json.loads(graph_to_json(g))
        assert len(doc["segments"]) == len(loop)
        assert len(doc["node_features"][0]) == 14


class TestRunHelpers:
    def test_straight_runs_cover_loop(self):
        loop = extract_boundary_loop(rect_mask(1, 1, 4, 6, n=8))
        runs = straight_runs(loop)
        covered = sorted(i for run in runs for i in run)
        assert covered == list(range(len(loop)))
        assert len(runs) == 4

    def test_door_runs_circular(self):
        labels = np.array([1, 1, 0, 0, 1, 0, 1, 1], np.int64)
        runs = door_runs(labels)
        as_sets = sorted(tuple(r) for r in runs)
        assert as_sets == [(4,), (6, 7, 0, 1)]

    def test_door_runs_empty_and_full(self):
        assert door_runs(np.zeros(6, np.int64)) == []
        assert door_runs(np.ones(6, np.int64)) == [list(range(6))]
