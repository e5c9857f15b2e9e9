"""Navigation graph over waterway axes, depth tagging and depth-constrained
shortest-path planning."""
import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

# on-edge band for point_in_polygon, relative to the coordinate magnitude
BOUNDARY_TOL = 1e-9


class PlanningError(Exception):
    pass


class EmptyChart(PlanningError):
    pass


class EmptyGraph(PlanningError):
    pass


class NoRoute(PlanningError):
    pass


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    length: float
    polyline: tuple
    depth: float = 0.0
    synthetic: bool = False

    def oriented(self, start):
        """Polyline walked from node ``start``."""
        return self.polyline if start == self.a else tuple(reversed(self.polyline))


@dataclass(frozen=True)
class NavGraph:
    nodes: tuple
    edges: tuple
    node_depths: tuple = ()
    merge_tol: float = 1.0

    def adjacency(self):
        adj = [[] for _ in self.nodes]
        for ei, e in enumerate(self.edges):
            adj[e.a].append((e.b, ei))
            adj[e.b].append((e.a, ei))
        return adj

    def components(self):
        """Component label per node (labels are 0.. in order of lowest node)."""
        parent = list(range(len(self.nodes)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for e in self.edges:
            ra, rb = find(e.a), find(e.b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        labels, out = {}, []
        for i in range(len(self.nodes)):
            out.append(labels.setdefault(find(i), len(labels)))
        return out

    def n_components(self):
        return len(set(self.components())) if self.nodes else 0


@dataclass(frozen=True)
class PlannedRoute:
    path_points: tuple
    path_depths: tuple
    cost: float = 0.0
    node_path: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.path_points) != len(self.path_depths):
            raise ValueError("path_points and path_depths differ in length")

    def to_geojson(self):
        return {"type": "Feature",
                "geometry": {"type": "LineString", "coordinates": [list(p) for p in self.path_points]},
                "properties": {"depths": list(self.path_depths)}}


def polyline_length(pts):
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:]))


def build_graph(segments, merge_tol=1.0):
    """Nodes from segment endpoints (snapped within ``merge_tol``), one edge per
    segment. Segments may be AxisSegments or plain point lists."""
    if not merge_tol > 0:
        raise ValueError("merge_tol must be > 0")
    segments = list(segments)
    if not segments:
        raise EmptyChart("no waterway-axis segments")
    nodes = []

    def snap(p):
        best, bd = -1, merge_tol
        for i, q in enumerate(nodes):
            d = math.hypot(p[0] - q[0], p[1] - q[1])
            if d < bd:
                best, bd = i, d
        if best < 0:
            nodes.append((float(p[0]), float(p[1])))
            return len(nodes) - 1
        return best

    edges = []
    seen = []
    for seg in segments:
        pts = [tuple(map(float, p)) for p in getattr(seg, "points", seg)]
        if len(pts) < 2:
            continue
        a, b = snap(pts[0]), snap(pts[-1])
        if a == b:
            continue
        poly = [nodes[a]] + pts[1:-1] + [nodes[b]]
        length = polyline_length(poly)
        key = (min(a, b), max(a, b))
        if any(k == key and abs(ln - length) <= merge_tol for k, ln in seen):
            continue
        seen.append((key, length))
        edges.append(Edge(a, b, length, tuple(poly)))
    return NavGraph(tuple(nodes), tuple(edges), tuple(0.0 for _ in nodes), merge_tol)


def connect_components(g):
    """Link components with straight synthetic edges, globally closest
    inter-component pair first, until one component remains."""
    if not g.nodes:
        raise EmptyGraph("graph has no nodes")
    labels = g.components()
    ncomp = max(labels) + 1
    if ncomp == 1:
        return g
    pts = np.asarray(g.nodes, dtype=float)
    members = [np.flatnonzero(np.asarray(labels) == c) for c in range(ncomp)]
    trees = [cKDTree(pts[m]) for m in members]
    # minimal pair for every component pair (c1 < c2)
    cand = []
    for c1 in range(ncomp):
        for c2 in range(c1 + 1, ncomp):
            small, big = (c1, c2) if len(members[c1]) <= len(members[c2]) else (c2, c1)
            dist, idx = trees[big].query(pts[members[small]])
            j = int(np.argmin(dist))
            i_small, i_big = int(members[small][j]), int(members[big][int(idx[j])])
            a, b = min(i_small, i_big), max(i_small, i_big)
            cand.append((float(dist[j]), a, b, c1, c2))
    cand.sort()
    parent = list(range(ncomp))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    new_edges = list(g.edges)
    for d, a, b, c1, c2 in cand:
        r1, r2 = find(c1), find(c2)
        if r1 == r2:
            continue
        parent[max(r1, r2)] = min(r1, r2)
        depth = min(g.node_depths[a], g.node_depths[b]) if g.node_depths else 0.0
        new_edges.append(Edge(a, b, d, (g.nodes[a], g.nodes[b]), depth, synthetic=True))
    return replace(g, edges=tuple(new_edges))


def _on_segment(px, py, x1, y1, x2, y2):
    tol = BOUNDARY_TOL * max(1.0, abs(x1), abs(y1), abs(x2), abs(y2))
    dx, dy = x2 - x1, y2 - y1
    L2 = dx * dx + dy * dy
    t = 0.0 if L2 == 0.0 else min(1.0, max(0.0, ((px - x1) * dx + (py - y1) * dy) / L2))
    return math.hypot(px - x1 - t * dx, py - y1 - t * dy) <= tol


def point_in_polygon(p, poly):
    """Even-odd test over all rings; points on any ring edge (within a
    relative tolerance of BOUNDARY_TOL) count as inside.

    ``poly`` is a PolygonRecord or a list of rings.
    """
    rings = getattr(poly, "rings", poly)
    if rings and rings[0] and not isinstance(rings[0][0], (tuple, list)):
        rings = [rings]
    px, py = float(p[0]), float(p[1])
    inside = False
    for ring in rings:
        n = len(ring)
        for i in range(n - 1):
            x1, y1 = ring[i]
            x2, y2 = ring[i + 1]
            if _on_segment(px, py, x1, y1, x2, y2):
                return True
            if (y1 > py) != (y2 > py):
                xi = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
                if px < xi:
                    inside = not inside
    return inside


def _depth_in(p, polys):
    best = None
    for q in polys:
        xmin, ymin, xmax, ymax = q.bbox
        if not (xmin <= p[0] <= xmax and ymin <= p[1] <= ymax):
            continue
        if point_in_polygon(p, q):
            best = q.depth if best is None else min(best, q.depth)
    return best


def _point_depth(p, polys, region):
    """Region-tagged polygons first; the whole layer if none of them cover p."""
    best = None
    if region:
        best = _depth_in(p, [q for q in polys if q.region == region])
    if best is None:
        best = _depth_in(p, polys)
    return 0.0 if best is None else max(0.0, float(best))


def _arc_midpoint(poly):
    total = polyline_length(poly)
    half, acc = 0.5 * total, 0.0
    for a, b in zip(poly, poly[1:]):
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        if acc + seg >= half and seg > 0:
            t = (half - acc) / seg
            return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        acc += seg
    return poly[len(poly) // 2]


def assign_depths(g, depare, node_regions=None):
    """Tag nodes and edges with chart depth (minimum over overlapping areas,
    0 where uncovered). ``depare`` is the layer or a list of PolygonRecords."""
    polys = list(getattr(depare, "polygons", depare) or [])
    regions = node_regions or [""] * len(g.nodes)
    nd = tuple(_point_depth(p, polys, regions[i]) for i, p in enumerate(g.nodes))
    edges = []
    for e in g.edges:
        mid = _arc_midpoint(e.polyline)
        dm = _point_depth(mid, polys, regions[e.a])
        edges.append(replace(e, depth=min(nd[e.a], nd[e.b], dm)))
    return replace(g, edges=tuple(edges), node_depths=nd)


def nearest_node(g, p):
    if not g.nodes:
        raise EmptyGraph("graph has no nodes")
    pts = np.asarray(g.nodes)
    d = np.hypot(pts[:, 0] - p[0], pts[:, 1] - p[1])
    return int(np.argmin(d))


def shortest_path(g, src, dst, min_depth=0.0):
    """Dijkstra over edges with depth >= min_depth.

    Returns (cost, node list, edge index list). Ties pop the lowest node index
    first; among equal-cost relaxations the first one found is kept.
    """
    adj = g.adjacency()
    dist = {src: 0.0}
    prev = {}
    heap = [(0.0, src)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            break
        for v, ei in adj[u]:
            e = g.edges[ei]
            if e.depth < min_depth or v in done:
                continue
            nd = d + e.length
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = (u, ei)
                heapq.heappush(heap, (nd, v))
    if dst not in done:
        raise NoRoute(f"no route from node {src} to {dst} with depth >= {min_depth}")
    nodes, eids = [dst], []
    while nodes[-1] != src:
        u, ei = prev[nodes[-1]]
        nodes.append(u)
        eids.append(ei)
    return dist[dst], nodes[::-1], eids[::-1]


def plan_path(g, given_point1, given_point2, min_depth=0.0):
    if min_depth < 0:
        raise ValueError("min_depth must be >= 0")
    if not g.nodes:
        raise EmptyGraph("graph has no nodes")
    a, b = nearest_node(g, given_point1), nearest_node(g, given_point2)
    cost, nodes, eids = shortest_path(g, a, b, min_depth)
    pts = [g.nodes[a]]
    depths = [g.node_depths[a]]
    for u, ei in zip(nodes, eids):
        e = g.edges[ei]
        poly = e.oriented(u)
        for q in poly[1:]:
            pts.append(tuple(q))
            depths.append(e.depth)
        depths[-1] = g.node_depths[nodes[nodes.index(u) + 1]]
    return PlannedRoute(tuple(pts), tuple(depths), cost, tuple(nodes))


def refine_path(route, dup_tol=0.5, window=5):
    """Drop near-duplicate points, then centred moving average on the interior
    (window shrinks symmetrically near the ends); endpoints never move."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 1")
    pts, dep = [], []
    for p, d in zip(route.path_points, route.path_depths):
        if pts and math.hypot(p[0] - pts[-1][0], p[1] - pts[-1][1]) <= dup_tol:
            continue
        pts.append((float(p[0]), float(p[1])))
        dep.append(d)
    goal = tuple(map(float, route.path_points[-1]))
    if pts[-1] != goal:
        # keep the true goal rather than the point it duplicated
        if len(pts) >= 2:
            pts[-1] = goal
            dep[-1] = route.path_depths[-1]
        else:
            pts.append(goal)
            dep.append(route.path_depths[-1])
    if len(pts) < 3 or window == 1:
        return PlannedRoute(tuple(pts), tuple(dep), polyline_length(pts), route.node_path)
    h = window // 2
    n = len(pts)
    out = [pts[0]]
    for i in range(1, n - 1):
        k = min(h, i, n - 1 - i)
        xs = [pts[j][0] for j in range(i - k, i + k + 1)]
        ys = [pts[j][1] for j in range(i - k, i + k + 1)]
        out.append((sum(xs) / len(xs), sum(ys) / len(ys)))
    out.append(pts[-1])
    orig = np.asarray(route.path_points, dtype=float)
    odep = list(route.path_depths)
    depths = []
    for i, p in enumerate(out):
        if i == 0 or i == n - 1:
            depths.append(dep[i])
            continue
        j = int(np.argmin(np.hypot(orig[:, 0] - p[0], orig[:, 1] - p[1])))
        depths.append(odep[j])
    # smoothing can collapse neighbours onto each other
    fp, fd = [out[0]], [depths[0]]
    for p, d in zip(out[1:], depths[1:]):
        if p == fp[-1]:
            continue
        fp.append(p)
        fd.append(d)
    return PlannedRoute(tuple(fp), tuple(fd), polyline_length(fp), route.node_path)


def plan_route(chart, start, goal, min_depth, merge_tol=1.0, epsilon=0.1, dup_tol=0.5, window=5):
    """Chart memory to refined route: clean axes, graph, connect, depth-tag, search."""
    from absim.chart_io import clean_waterway_axes

    segs = clean_waterway_axes(chart["wtwaxs"], epsilon)
    g = build_graph(segs, merge_tol)
    regions = [""] * len(g.nodes)
    for s in segs:
        for p in (s.points[0], s.points[-1]):
            i = nearest_node(g, p)
            if not regions[i]:
                regions[i] = s.region
    g = assign_depths(g, chart["depare"], regions)
    g = connect_components(g)
    route = plan_path(g, start, goal, min_depth)
    return refine_path(route, dup_tol, window), g
