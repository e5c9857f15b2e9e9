import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from absim.chart_io import AxisSegment, PolygonRecord
from absim.waterway_graph import (EmptyChart, EmptyGraph, Edge, NavGraph, NoRoute, PlannedRoute,
                                  assign_depths, build_graph, connect_components, plan_path,
                                  point_in_polygon, refine_path, shortest_path)

from oracles import brute_force_path, dist_to_ring, random_graph, random_star_polygon, winding_inside


def square(x0, y0, x1, y1, depth, region=""):
    ring = [(x0, y0), (x0, y1), (x1, y1), (x1, y0), (x0, y0)]
    return PolygonRecord([ring], {"depth": depth, "boundingbox": (x0, y0, x1, y1), "region": region})


def line_graph(depth=5.0):
    g = build_graph([[(0, 0), (1, 0)], [(1, 0), (2, 0)]], 0.01)
    return assign_depths(g, [square(-1, -1, 3, 1, depth)])


def test_build_graph_basic():
    g = build_graph([[(0, 0), (1, 0)], [(1, 0), (2, 0)]], 0.01)
    assert len(g.nodes) == 3 and len(g.edges) == 2
    assert [e.length for e in g.edges] == [1.0, 1.0]


def test_build_graph_merges_close_endpoints():
    g = build_graph([[(0, 0), (1, 0)], [(1.005, 0), (2, 0)]], 0.01)
    assert len(g.nodes) == 3
    assert g.edges[0].b == g.edges[1].a


def test_build_graph_empty():
    with pytest.raises(EmptyChart):
        build_graph([], 1.0)
    with pytest.raises(ValueError):
        build_graph([[(0, 0), (1, 0)]], 0.0)


def test_build_graph_dedups_and_keeps_polyline_length():
    seg = AxisSegment([(0, 0), (3, 4), (6, 0)], "r")
    g = build_graph([seg, [(6, 0), (3, 4), (0, 0)]], 0.5)
    assert len(g.edges) == 1
    e = g.edges[0]
    assert e.length == pytest.approx(10.0, rel=1e-12)
    assert e.oriented(e.b)[0] == g.nodes[e.b]


def test_connect_two_chains():
    g = build_graph([[(0, 0), (1, 0)], [(4, 0), (5, 0)]], 0.01)
    c = connect_components(g)
    syn = [e for e in c.edges if e.synthetic]
    assert len(syn) == 1 and syn[0].length == pytest.approx(3.0)
    assert c.n_components() == 1


def test_connect_already_connected_is_fixpoint():
    g = line_graph()
    assert connect_components(g) is g


def test_connect_singletons_closest_first():
    g = NavGraph(((0.0, 0.0), (1.0, 0.0), (5.0, 0.0)), (), (0.0, 0.0, 0.0))
    c = connect_components(g)
    assert [(e.a, e.b) for e in c.edges] == [(0, 1), (1, 2)]
    with pytest.raises(EmptyGraph):
        connect_components(NavGraph((), ()))


@settings(max_examples=100, deadline=None)
@given(pts=st.lists(st.tuples(st.integers(0, 60), st.integers(0, 60)), min_size=1, max_size=15, unique=True))
def test_connect_adds_components_minus_one(pts):
    g = NavGraph(tuple((float(x), float(y)) for x, y in pts), (), tuple(0.0 for _ in pts))
    c = connect_components(g)
    assert c.n_components() == 1
    assert sum(e.synthetic for e in c.edges) == len(pts) - 1


def test_point_in_polygon_examples():
    sq = square(0, 0, 10, 10, 1)
    assert point_in_polygon((5, 5), sq)
    assert point_in_polygon((10, 5), sq)
    assert point_in_polygon((0, 0), sq)
    assert not point_in_polygon((10.0001, 5), sq)


def test_point_in_polygon_hole():
    outer = [(0, 0), (0, 10), (10, 10), (10, 0), (0, 0)]
    hole = [(4, 4), (6, 4), (6, 6), (4, 6), (4, 4)]
    assert not point_in_polygon((5, 5), [outer, hole])
    assert point_in_polygon((2, 2), [outer, hole])
    assert point_in_polygon((4, 5), [outer, hole])  # hole boundary


def test_point_in_polygon_against_oracle():
    rng = np.random.default_rng(7)
    for _ in range(500):
        ring = random_star_polygon(rng)
        p = tuple(rng.uniform(-15, 15, 2))
        if dist_to_ring(p, ring) < 1e-6:
            continue
        assert point_in_polygon(p, [ring]) == winding_inside(p, ring)


def test_assign_depths():
    g = build_graph([[(1, 1), (2, 1)], [(50, 50), (51, 50)]], 0.1)
    polys = [square(0, 0, 10, 10, 4), square(0, 0, 5, 5, 6)]
    d = assign_depths(g, polys)
    assert d.node_depths[:2] == (4.0, 4.0)  # overlap: minimum wins
    assert d.node_depths[2:] == (0.0, 0.0)
    assert d.edges[0].depth == 4.0 and d.edges[1].depth == 0.0


def test_edge_depth_uses_midpoint():
    g = build_graph([[(0, 0), (10, 0)]], 0.1)
    d = assign_depths(g, [square(-1, -1, 11, 1, 5), square(4, -1, 6, 1, 1)])
    assert d.node_depths == (5.0, 5.0) and d.edges[0].depth == 1.0


def test_region_filter_then_fallback():
    g = build_graph([[(1, 1), (2, 1)]], 0.1)
    polys = [square(0, 0, 10, 10, 4, "a"), square(0, 0, 10, 10, 2, "b")]
    assert assign_depths(g, polys, ["a", "a"]).node_depths == (4.0, 4.0)
    assert assign_depths(g, polys, ["b", "b"]).node_depths == (2.0, 2.0)
    assert assign_depths(g, polys, ["zz", "zz"]).node_depths == (2.0, 2.0)


def test_plan_line_graph():
    r = plan_path(line_graph(), (-0.1, 0.05), (2.2, 0))
    assert r.path_points == ((0.0, 0.0), (1.0, 0.0), (2.0, 0.0))
    assert r.cost == 2.0 and r.path_depths == (5.0, 5.0, 5.0)
    with pytest.raises(NoRoute):
        plan_path(line_graph(), (0, 0), (2, 0), 10.0)


def test_plan_square_prefers_deep_route():
    nodes = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 3.0))
    E = [Edge(0, 1, 1.0, (nodes[0], nodes[1]), 1.0), Edge(1, 2, 1.0, (nodes[1], nodes[2]), 1.0),
         Edge(0, 3, 3.0, (nodes[0], nodes[3]), 5.0), Edge(3, 2, 2.0, (nodes[3], nodes[2]), 5.0)]
    g = NavGraph(nodes, tuple(E), (5.0,) * 4)
    assert plan_path(g, (0, 0), (1, 1), 0.0).node_path == (0, 1, 2)
    r = plan_path(g, (0, 0), (1, 1), 2.0)
    assert r.node_path == (0, 3, 2) and r.cost == 5.0
    with pytest.raises(EmptyGraph):
        plan_path(NavGraph((), ()), (0, 0), (1, 1))


def test_dijkstra_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(200):
        g = random_graph(rng)
        md = float(rng.choice([0.0, 2.0, 3.0]))
        src, dst = 0, len(g.nodes) - 1
        oracle = brute_force_path(g, src, dst, md)
        if oracle is None:
            with pytest.raises(NoRoute):
                shortest_path(g, src, dst, md)
            continue
        cost, nodes, eids = shortest_path(g, src, dst, md)
        assert cost == oracle[0] and nodes == oracle[1]
        assert all(g.edges[e].depth >= md for e in eids)


def test_cost_monotone_in_min_depth():
    rng = np.random.default_rng(5)
    for _ in range(100):
        g = random_graph(rng)
        prev = 0.0
        for md in (0.0, 1.5, 2.5, 4.0, 6.0):
            try:
                c = shortest_path(g, 0, len(g.nodes) - 1, md)[0]
            except NoRoute:
                c = math.inf
            assert c >= prev
            prev = c


def _route(pts):
    return PlannedRoute(tuple(pts), tuple(float(i) for i in range(len(pts))))


def test_refine_examples():
    r = refine_path(_route([(0, 0), (1, 0), (1, 1)]), 0.01, 3)
    assert r.path_points[1] == pytest.approx((2 / 3, 1 / 3))
    r = refine_path(_route([(0, 0), (0, 0.1), (1, 0), (1, 1)]), 0.5, 1)
    assert r.path_points == ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0))
    two = _route([(0, 0), (5, 5)])
    assert refine_path(two, 0.5, 5).path_points == two.path_points
    with pytest.raises(ValueError):
        refine_path(two, 0.5, 4)


@settings(max_examples=150, deadline=None)
@given(pts=st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=2, max_size=30),
       window=st.sampled_from([1, 3, 5, 7]))
def test_refine_properties(pts, window):
    r = _route(pts)
    out = refine_path(r, 0.5, window)
    assert out.path_points[0] == tuple(map(float, pts[0]))
    assert out.path_points[-1] == tuple(map(float, pts[-1]))
    assert len(out.path_points) <= len(pts)
    assert len(out.path_points) == len(out.path_depths)
    assert all(a != b for a, b in zip(out.path_points, out.path_points[1:]))


def test_geojson_shape():
    gj = _route([(0, 0), (1, 1)]).to_geojson()
    assert gj["geometry"]["type"] == "LineString" and gj["properties"]["depths"] == [0.0, 1.0]
