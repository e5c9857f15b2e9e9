"""Static SVG map: chart layers, planned route, trajectories and markers."""
WIDTH = 800.0
MARGIN = 20.0


def _depth_fill(depth, dmax):
    # light to dark blue with depth
    f = 0.0 if dmax <= 0 else max(0.0, min(1.0, depth / dmax))
    r = int(round(200 - 150 * f))
    g = int(round(225 - 105 * f))
    b = int(round(255 - 55 * f))
    return f"#{r:02x}{g:02x}{b:02x}"


class _Frame:
    def __init__(self, bounds):
        xmin, ymin, xmax, ymax = bounds
        w = max(xmax - xmin, 1e-9)
        h = max(ymax - ymin, 1e-9)
        self.scale = (WIDTH - 2 * MARGIN) / max(w, h)
        self.xmin, self.ymax = xmin, ymax
        self.width = 2 * MARGIN + w * self.scale
        self.height = 2 * MARGIN + h * self.scale

    def pt(self, p):
        return (MARGIN + (p[0] - self.xmin) * self.scale, MARGIN + (self.ymax - p[1]) * self.scale)

    def path(self, pts):
        return " ".join("%.2f,%.2f" % self.pt(p) for p in pts)


def _bounds(chart, route, log):
    xs, ys = [], []
    if chart is not None:
        b = chart.bounds()
        if b:
            xs += [b[0], b[2]]
            ys += [b[1], b[3]]
    for p in route.path_points:
        xs.append(p[0])
        ys.append(p[1])
    if log is not None:
        for row in log.rows:
            xs.append(row[1])
            ys.append(row[2])
        for tg in log.targets:
            for t in tg:
                xs.append(t[0])
                ys.append(t[1])
    return min(xs), min(ys), max(xs), max(ys)


def render_svg(chart, route, log=None):
    """SVG document text. Output depends only on the inputs."""
    fr = _Frame(_bounds(chart, route, log))
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<svg xmlns="http://www.w3.org/2000/svg" width="%.0f" height="%.0f" viewBox="0 0 %.2f %.2f">'
           % (fr.width, fr.height, fr.width, fr.height),
           '<rect width="100%" height="100%" fill="#ffffff"/>']

    def polygons(layer, cls, fill_fn):
        out.append(f'<g class="{cls}">')
        for poly in layer.polygons:
            d = " ".join("M " + fr.path(ring) + " Z" for ring in poly.rings)
            out.append(f'<path d="{d}" fill="{fill_fn(poly)}" fill-rule="evenodd" stroke="none"/>')
        out.append("</g>")

    if chart is not None:
        layers = chart.layers
        if "lndare" in layers:
            polygons(layers["lndare"], "land", lambda p: "#d9cfa5")
        if "depare" in layers:
            dmax = max([p.depth for p in layers["depare"].polygons] or [0.0])
            polygons(layers["depare"], "depth", lambda p: _depth_fill(p.depth, dmax))
        if "bridge" in layers:
            polygons(layers["bridge"], "bridge", lambda p: "#7a7a7a")
        if "wtwaxs" in layers:
            out.append('<g class="axes">')
            for line in layers["wtwaxs"].lines:
                out.append(f'<polyline points="{fr.path(line)}" fill="none" stroke="#5b7fa6" '
                           'stroke-width="1" stroke-dasharray="4,3"/>')
            out.append("</g>")

    out.append(f'<polyline class="route" points="{fr.path(route.path_points)}" fill="none" '
               'stroke="#d62728" stroke-width="2"/>')
    if log is not None and log.rows:
        own = [(r[1], r[2]) for r in log.rows]
        out.append(f'<polyline class="trajectory" points="{fr.path(own)}" fill="none" '
                   'stroke="#111111" stroke-width="1.5"/>')
        for i in range(log.n_targets):
            pts = [tg[i][:2] for tg in log.targets]
            out.append(f'<polyline class="target" data-index="{i}" points="{fr.path(pts)}" fill="none" '
                       'stroke="#ff7f0e" stroke-width="1.5"/>')
    sx, sy = fr.pt(route.path_points[0])
    ex, ey = fr.pt(route.path_points[-1])
    out.append('<rect class="marker start" x="%.2f" y="%.2f" width="10" height="10" fill="#2ca02c"/>'
               % (sx - 5, sy - 5))
    out.append('<circle class="marker end" cx="%.2f" cy="%.2f" r="6" fill="#9467bd"/>' % (ex, ey))
    out.append("</svg>")
    return "\n".join(out) + "\n"

