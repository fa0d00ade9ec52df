"""Tree geometry: predecessors, confluents, cones, boundary points.

BFS on lazily generated balls serves as the independent distance oracle, and
full cone enumeration as the counting oracle.
"""

import pytest
from hypothesis import given, settings

from dlwalks import tree as T
from dlwalks.errors import InsufficientDepth
from dlwalks.tree import (
    ROOT,
    BoundaryPoint,
    ConeSpec,
    TreeVertex,
    ancestor,
    ball,
    boundary_through,
    cone_count,
    confluent,
    descend,
    enumerate_cone,
    geodesic_toward,
    make_vertex,
    neighbors,
    predecessor,
    successor,
    successors,
    up,
    up_pair,
    up_to_boundary,
)

from conftest import tree_vertices


def bfs_distance(x, y, q):
    if x == y:
        return 0
    seen = {x}
    frontier = [x]
    d = 0
    while True:
        d += 1
        nxt = []
        for v in frontier:
            for w in neighbors(v, q):
                if w == y:
                    return d
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt


class TestPredecessorSuccessor:
    def test_predecessor_of_root(self):
        assert predecessor(ROOT) == TreeVertex(-1, ())

    def test_predecessor_drops_first_symbol(self):
        assert predecessor(make_vertex(1, {0: 1})) == ROOT
        assert predecessor(make_vertex(5, {0: 1, 1: 1})) == make_vertex(4, {0: 1})

    def test_successors_of_root(self):
        succ = successors(ROOT, 2)
        assert len(succ) == 2
        assert {v.symbol(0) for v in succ} == {0, 1}
        assert all(v.hor == 1 for v in succ)

    def test_successors_reject_small_q(self):
        with pytest.raises(ValueError):
            successors(ROOT, 1)

    @given(tree_vertices(3))
    def test_roundtrip(self, v):
        for w in successors(v, 3):
            assert predecessor(w) == v
        assert v in successors(predecessor(v), 3)

    @given(tree_vertices(2))
    def test_hor_decreases(self, v):
        assert predecessor(v).hor == v.hor - 1


class TestConfluent:
    def test_identity(self):
        v = make_vertex(2, {0: 1, 1: 1})
        assert confluent(v, v) == v

    def test_with_predecessor(self):
        v = make_vertex(1, {0: 1})
        assert confluent(v, ROOT) == ROOT

    def test_siblings_meet_at_root(self):
        a = make_vertex(1, {0: 1})
        b = make_vertex(1, {})
        assert confluent(a, b) == ROOT

    def test_brute_force_oracle(self):
        # deepest common iterated predecessor over a depth-3 ball of T_2
        verts = ball(ROOT, 3, 2)
        for x in verts:
            for y in verts:
                cands = []
                xa = {ancestor(x, i) for i in range(0, 12)}
                for j in range(0, 12):
                    if ancestor(y, j) in xa:
                        cands.append(ancestor(y, j))
                best = max(cands, key=lambda v: v.hor)
                assert confluent(x, y) == best

    @given(tree_vertices(2), tree_vertices(2))
    @settings(max_examples=60)
    def test_symmetric_and_ancestral(self, x, y):
        c = confluent(x, y)
        assert c == confluent(y, x)
        assert ancestor(x, x.hor - c.hor) == c
        assert ancestor(y, y.hor - c.hor) == c


class TestUp:
    def test_self(self):
        assert up(ROOT, ROOT) == 0

    def test_predecessor_pair(self):
        v = make_vertex(1, {0: 1})
        assert up(v, ROOT) == 1
        assert up(ROOT, v) == 0

    @pytest.mark.parametrize("q", [2, 3])
    def test_distance_via_bfs(self, q):
        verts = ball(ROOT, 4, q)
        sample = verts[:: max(1, len(verts) // 40)]
        for x in sample:
            for y in sample:
                a, b = up_pair(x, y)
                assert a + b == bfs_distance(x, y, q)
                assert b - a == y.hor - x.hor


class TestCones:
    def test_counts_frozen(self):
        assert cone_count(2, 3, 0) == 1
        assert cone_count(2, 0, 3) == 8
        assert cone_count(2, 1, 1) == 1

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            cone_count(2, -1, 0)

    @pytest.mark.parametrize("q", [2, 3])
    def test_count_matches_enumeration(self, q):
        base = descend(ancestor(ROOT, 1), (1, 0))  # an off-axis base vertex
        for k in range(5):
            for r in range(5):
                cone = enumerate_cone(ConeSpec(base, k, r), q)
                assert len(cone) == cone_count(q, k, r)
                assert len(set(cone)) == len(cone)
                for y in cone:
                    assert up_pair(base, y) == (k, r)

    def test_trivial_cones(self):
        assert enumerate_cone(ConeSpec(ROOT, 0, 0), 2) == [ROOT]
        assert enumerate_cone(ConeSpec(ROOT, 2, 0), 2) == [ancestor(ROOT, 2)]


class TestBoundary:
    def test_geodesic_toward_anchor(self):
        xi = boundary_through(make_vertex(2, {0: 1}))
        assert geodesic_toward(xi, 0) == xi.anchor
        for n in range(20):
            assert geodesic_toward(xi, n).hor - xi.anchor.hor == n
        y3, y4 = geodesic_toward(xi, 3), geodesic_toward(xi, 4)
        assert confluent(y3, y4) == y3

    def test_geodesic_confluents(self):
        xi = boundary_through(descend(ROOT, (1, 0, 1)))
        for n in range(5):
            for m in range(5):
                c = confluent(geodesic_toward(xi, n), geodesic_toward(xi, m))
                assert c == geodesic_toward(xi, min(n, m))

    def test_up_to_boundary_on_ray(self):
        xi = boundary_through(descend(ROOT, (1,) + (0,) * 9))
        assert up_to_boundary(ROOT, xi) == 0
        assert up_to_boundary(predecessor(ROOT), xi) == 0

    def test_up_to_boundary_stabilizes(self):
        xi = boundary_through(descend(ROOT, (1,) + (0,) * 9))
        x = descend(ancestor(ROOT, 2), (1, 1, 0))
        val = up_to_boundary(x, xi)
        for n in range(6, 16):
            assert up(x, geodesic_toward(xi, n)) == val

    def test_insufficient_depth(self):
        xi = boundary_through(descend(ROOT, (1,)))
        deep_on_ray = descend(ROOT, (1, 0, 0, 0))
        with pytest.raises(InsufficientDepth):
            up_to_boundary(deep_on_ray, xi)

    def test_cylinder_partition(self):
        # classify a dense family of anchored rays by (up(o, .), up(x, .)): the
        # observed cells must be exactly the realizable ones for this x, which
        # sits in T_{1,2} at horocycle 1
        x = descend(ancestor(ROOT, 1), (1, 1))
        anchors = [descend(ancestor(ROOT, j), path + (0,) * 10)
                   for j in range(5)
                   for path in [(0,), (1,), (1, 1), (1, 0), (0, 1), (1, 1, 1)]]
        cells = set()
        for a in anchors:
            xi = BoundaryPoint(a)
            k, l = up_to_boundary(ROOT, xi), up_to_boundary(x, xi)
            assert k >= 0 and l >= 0
            # cross-check against deep-vertex confluents
            y = geodesic_toward(xi, 14)
            assert (k, l) == (up(ROOT, y), up(x, y))
            cells.add((k, l))
        expected = {(1, 0), (1, 1), (0, 2)} | {(j, j + 1) for j in range(2, 5)}
        assert cells == expected


class TestJson:
    def test_roundtrip(self):
        v = make_vertex(3, {0: 1, 4: 1})
        assert TreeVertex.from_json(v.to_json()) == v
        xi = BoundaryPoint(v)
        assert BoundaryPoint.from_json(xi.to_json()) == xi

    def test_rejects_bad_symbol(self):
        with pytest.raises(ValueError):
            TreeVertex.from_json({"hor": 0, "word": {"0": 5}}, q=2)
