"""Regenerate ghent_synthetic_chart.json: a small invented canal network laid
out in metres around a Ghent-like origin and written in lon/lat degrees.

Layout: a main channel from the south, a shallow shortcut (shoal near its
bend) and a longer deep detour that rejoin in the north, plus a dock branch
whose axis stops 4 m short of the junction.
"""
import json
import math
import os

from absim.chart_io import Projection

ORIGIN = (3.7250, 51.0540)
HALF_WIDTH = 75.0

AXES = [
    ("gent-01", [(0.0, 0.0), (0.0, 1500.0)]),
    ("gent-02", [(0.0, 1500.0), (600.0, 2600.0), (600.0, 3800.0)]),
    ("gent-02", [(0.0, 1500.0), (-800.0, 2300.0), (-600.0, 3400.0), (600.0, 3800.0)]),
    ("gent-01", [(4.0, 0.0), (900.0, -200.0)]),
]
CORRIDOR_DEPTHS = [5.0, 5.0, 4.5, 3.5]
SHOAL = ("gent-02", [(480.0, 2380.0), (720.0, 2380.0), (720.0, 2820.0), (480.0, 2820.0)], 2.0)
LAND = [
    ("gent-01", [(120.0, 200.0), (900.0, 200.0), (900.0, 1400.0), (120.0, 1400.0)]),
    ("gent-02", [(-500.0, 2500.0), (420.0, 2500.0), (420.0, 3500.0), (-500.0, 3500.0)]),
]
BRIDGE = ("gent-01", [(-90.0, 780.0), (90.0, 780.0), (90.0, 820.0), (-90.0, 820.0)])


def corridor(a, b, hw):
    """Rectangle around segment a-b, padded by hw at both ends."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    n = math.hypot(dx, dy)
    ux, uy = dx / n, dy / n
    nx, ny = -uy, ux
    a2 = (a[0] - hw * ux, a[1] - hw * uy)
    b2 = (b[0] + hw * ux, b[1] + hw * uy)
    return [(a2[0] + hw * nx, a2[1] + hw * ny), (b2[0] + hw * nx, b2[1] + hw * ny),
            (b2[0] - hw * nx, b2[1] - hw * ny), (a2[0] - hw * nx, a2[1] - hw * ny)]


def densify(pts, step=25.0):
    """Resample each straight piece so chart axes carry closely spaced vertices."""
    out = [pts[0]]
    for a, b in zip(pts, pts[1:]):
        n = max(1, int(math.ceil(math.hypot(b[0] - a[0], b[1] - a[1]) / step)))
        out.extend((a[0] + (b[0] - a[0]) * i / n, a[1] + (b[1] - a[1]) * i / n) for i in range(1, n + 1))
    return out


def build():
    proj = Projection(*ORIGIN)

    def deg(pts, close=False):
        pts = list(pts) + ([pts[0]] if close else [])
        return [[round(v, 10) for v in proj.inverse(x, y)] for x, y in pts]

    feats = []
    for (region, pts), depth in zip(AXES, CORRIDOR_DEPTHS):
        feats.append({"class": "wtwaxs", "geometry": {"kind": "polyline", "parts": [deg(densify(pts))]},
                      "attributes": {"region": region, "OBJNAM": "axis"}})
        for a, b in zip(pts, pts[1:]):
            feats.append({"class": "depare",
                          "geometry": {"kind": "polygon", "rings": [deg(corridor(a, b, HALF_WIDTH), True)]},
                          "attributes": {"region": region, "SOUACC": depth}})
    region, ring, depth = SHOAL
    feats.append({"class": "depare", "geometry": {"kind": "polygon", "rings": [deg(ring, True)]},
                  "attributes": {"region": region, "VERDAT": depth}})
    for region, ring in LAND:
        feats.append({"class": "lndare", "geometry": {"kind": "polygon", "rings": [deg(ring, True)]},
                      "attributes": {"region": region}})
    region, ring = BRIDGE
    feats.append({"class": "bridge", "geometry": {"kind": "polygon", "rings": [deg(ring, True)]},
                  "attributes": {"region": region, "OBJNAM": "footbridge"}})
    return {"origin": list(ORIGIN), "features": feats}


if __name__ == "__main__":
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "ghent_synthetic_chart.json")
    with open(out, "w", encoding="utf-8") as f:
        json.dump(build(), f, indent=1)
        f.write("\n")
    print(out)
