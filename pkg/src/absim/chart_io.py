"""Chart ingestion: ESRI shapefile/dBASE decoding, the JSON chart format, and
categorisation into per-class layers.

Input coordinates are WGS-84 degrees and are projected onto a local tangent
plane (equirectangular about an origin, usually the chart's bounding-box
centre). Charts written with ``"crs": "local"`` carry metres already.
"""
import json
import logging
import math
import os
import struct
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

EARTH_RADIUS = 6371000.0
DEFAULT_CLASSES = ("depare", "wtwaxs", "bridge", "lndare")

SHP_NULL, SHP_POINT, SHP_POLYLINE, SHP_POLYGON = 0, 1, 3, 5
_KIND_BY_TYPE = {SHP_POINT: "point", SHP_POLYLINE: "polyline", SHP_POLYGON: "polygon"}


class ChartError(Exception):
    """Base class for chart ingestion failures."""


class BadMagic(ChartError):
    pass


class UnsupportedShapeType(ChartError):
    pass


class RecordCountMismatch(ChartError):
    pass


class TruncatedFile(ChartError):
    pass


class SchemaError(ChartError):
    pass


class GeometryError(ChartError):
    pass


class UnknownClass(ChartError):
    pass


class MissingDepthAttr(ChartError):
    pass


@dataclass(frozen=True)
class Projection:
    """Equirectangular projection about (lon0, lat0) in degrees."""
    lon0: float
    lat0: float
    radius: float = EARTH_RADIUS

    def forward(self, lon, lat):
        k = math.pi / 180.0
        return (self.radius * (lon - self.lon0) * k * math.cos(self.lat0 * k),
                self.radius * (lat - self.lat0) * k)

    def inverse(self, x, y):
        k = math.pi / 180.0
        return (self.lon0 + x / (self.radius * math.cos(self.lat0 * k) * k),
                self.lat0 + y / (self.radius * k))

    @classmethod
    def about_bbox(cls, xmin, ymin, xmax, ymax):
        return cls(0.5 * (xmin + xmax), 0.5 * (ymin + ymax))


class LocalFrame:
    """Identity projection for charts already in metres."""

    def forward(self, x, y):
        return float(x), float(y)

    def inverse(self, x, y):
        return float(x), float(y)


@dataclass
class RawFeature:
    geometry_kind: str
    coordinates: list
    attributes: dict = field(default_factory=dict)

    def validate(self):
        if self.geometry_kind == "polygon":
            for ring in self.coordinates:
                if len(ring) < 4:
                    raise GeometryError(f"polygon ring has {len(ring)} vertices, need >= 4")
                if tuple(ring[0]) != tuple(ring[-1]):
                    raise GeometryError("polygon ring is not closed")
        elif self.geometry_kind == "polyline":
            for part in self.coordinates:
                if len(part) < 2:
                    raise GeometryError("polyline part has fewer than 2 vertices")
        elif self.geometry_kind != "point":
            raise GeometryError(f"unknown geometry kind {self.geometry_kind!r}")
        return self


@dataclass
class PolygonRecord:
    rings: list
    info: dict

    @property
    def depth(self):
        return self.info["depth"]

    @property
    def bbox(self):
        return self.info["boundingbox"]

    @property
    def region(self):
        return self.info.get("region", "")


@dataclass
class Layer:
    name: str
    points: list = field(default_factory=list)
    lines: list = field(default_factory=list)
    polygons: list = field(default_factory=list)
    info: list = field(default_factory=list)


@dataclass
class ChartFeatureSet:
    layers: dict
    projection: object = None

    def __getitem__(self, name):
        return self.layers[name]

    def bounds(self):
        xs, ys = [], []
        for layer in self.layers.values():
            for p in layer.points:
                xs.append(p[0])
                ys.append(p[1])
            for line in layer.lines:
                xs.extend(q[0] for q in line)
                ys.extend(q[1] for q in line)
            for poly in layer.polygons:
                for ring in poly.rings:
                    xs.extend(q[0] for q in ring)
                    ys.extend(q[1] for q in ring)
        if not xs:
            return None
        return min(xs), min(ys), max(xs), max(ys)


# --------------------------------------------------------------------------
# dBASE


def parse_dbf(data):
    """Decode a dBASE III table into a list of attribute dicts.

    Character fields are trimmed strings; N/F fields become floats (None when
    blank); anything else is kept as a trimmed string.
    """
    if len(data) < 32:
        raise TruncatedFile("dbf header shorter than 32 bytes")
    nrec, hlen, rlen = struct.unpack("<IHH", data[4:12])
    fields_ = []
    pos = 32
    while pos < hlen - 1 and data[pos] != 0x0D:
        if pos + 32 > len(data):
            raise TruncatedFile("dbf field descriptors run past end of file")
        desc = data[pos:pos + 32]
        name = desc[:11].split(b"\x00", 1)[0].decode("ascii", "replace").strip()
        ftype = chr(desc[11])
        flen = desc[16]
        fields_.append((name, ftype, flen))
        pos += 32
    if hlen + nrec * rlen > len(data):
        raise TruncatedFile("dbf records run past end of file")
    out = []
    for i in range(nrec):
        off = hlen + i * rlen + 1  # skip deletion flag
        rec = {}
        for name, ftype, flen in fields_:
            raw = data[off:off + flen].decode("latin-1").strip()
            off += flen
            if ftype in ("N", "F"):
                raw = raw.strip("*")
                rec[name] = float(raw) if raw else None
            else:
                rec[name] = raw
        out.append(rec)
    return out


# --------------------------------------------------------------------------
# shapefile


def shp_header(data):
    """(shape_type, (xmin, ymin, xmax, ymax)) from the 100-byte main header."""
    if len(data) < 100:
        raise TruncatedFile("shp header shorter than 100 bytes")
    code = struct.unpack(">i", data[0:4])[0]
    if code != 9994:
        raise BadMagic(f"file code {code}, expected 9994")
    stype = struct.unpack("<i", data[32:36])[0]
    bbox = struct.unpack("<4d", data[36:68])
    return stype, bbox


def _check_type(stype):
    if stype not in (SHP_NULL, SHP_POINT, SHP_POLYLINE, SHP_POLYGON):
        raise UnsupportedShapeType(f"shape type {stype} (only 2-D point/polyline/polygon)")


def _shp_records(data):
    stype, _ = shp_header(data)
    _check_type(stype)
    flen = struct.unpack(">i", data[24:28])[0] * 2
    if flen > len(data):
        raise TruncatedFile(f"declared length {flen} bytes exceeds buffer of {len(data)}")
    pos = 100
    while pos < flen:
        if pos + 8 > flen:
            raise TruncatedFile("record header past end of file")
        _, clen = struct.unpack(">ii", data[pos:pos + 8])
        clen *= 2
        start = pos + 8
        if start + clen > flen or clen < 4:
            raise TruncatedFile("record content past end of file")
        yield data[start:start + clen]
        pos = start + clen


def _decode_shape(rec):
    stype = struct.unpack("<i", rec[:4])[0]
    _check_type(stype)
    if stype == SHP_NULL:
        return None, None
    if stype == SHP_POINT:
        if len(rec) < 20:
            raise TruncatedFile("point record too short")
        return "point", [struct.unpack("<2d", rec[4:20])]
    if len(rec) < 44:
        raise TruncatedFile("poly record too short")
    nparts, npts = struct.unpack("<ii", rec[36:44])
    need = 44 + 4 * nparts + 16 * npts
    if len(rec) < need:
        raise TruncatedFile("poly record shorter than its part/point counts")
    parts = list(struct.unpack(f"<{nparts}i", rec[44:44 + 4 * nparts]))
    flat = struct.unpack(f"<{2 * npts}d", rec[44 + 4 * nparts:need])
    pts = [(flat[2 * i], flat[2 * i + 1]) for i in range(npts)]
    bounds = parts + [npts]
    return _KIND_BY_TYPE[stype], [pts[bounds[i]:bounds[i + 1]] for i in range(nparts)]


def parse_shapefile(shp_bytes, dbf_bytes, projection=None, sourcefile=None):
    """Decode a .shp/.dbf pair into projected RawFeatures.

    Null records are skipped (their dbf row is consumed). Without an explicit
    projection the bounding-box centre of this file is used as origin.
    """
    stype, bbox = shp_header(shp_bytes)
    _check_type(stype)
    records = list(_shp_records(shp_bytes))
    attrs = parse_dbf(dbf_bytes)
    if len(records) != len(attrs):
        raise RecordCountMismatch(f"shp has {len(records)} records, dbf has {len(attrs)}")
    if projection is None:
        projection = Projection.about_bbox(*bbox)
    out = []
    for rec, att in zip(records, attrs):
        kind, parts = _decode_shape(rec)
        if kind is None:
            continue
        att = dict(att)
        if sourcefile is not None:
            att.setdefault("sourcefile", sourcefile)
        if kind == "point":
            coords = [projection.forward(*p) for p in parts]
        else:
            coords = [[projection.forward(*p) for p in part] for part in parts]
        out.append(RawFeature(kind, coords, att).validate())
    return out


def load_shapefile_dir(path, classes=DEFAULT_CLASSES, projection=None):
    """Read ``<class>.shp``/``<class>.dbf`` pairs present in ``path``.

    Returns ``(features, projection)`` where features are (class, RawFeature)
    pairs; a shared origin is taken from the union of the file bounding boxes.
    """
    pairs = []
    for cls in classes:
        shp = os.path.join(path, cls + ".shp")
        dbf = os.path.join(path, cls + ".dbf")
        if os.path.exists(shp):
            if not os.path.exists(dbf):
                raise ChartError(f"{shp} has no matching .dbf")
            with open(shp, "rb") as f:
                sb = f.read()
            with open(dbf, "rb") as f:
                db = f.read()
            pairs.append((cls, sb, db))
    if not pairs:
        raise ChartError(f"no chart shapefiles found in {path}")
    if projection is None:
        boxes = [shp_header(sb)[1] for _, sb, _ in pairs]
        boxes = [b for b in boxes if b[0] <= b[2]] or [(0.0, 0.0, 0.0, 0.0)]
        projection = Projection.about_bbox(min(b[0] for b in boxes), min(b[1] for b in boxes),
                                           max(b[2] for b in boxes), max(b[3] for b in boxes))
    feats = []
    for cls, sb, db in pairs:
        for f in parse_shapefile(sb, db, projection, sourcefile=cls):
            feats.append((cls, f))
    return feats, projection


# --------------------------------------------------------------------------
# JSON chart format


def _json_bbox(doc):
    xs, ys = [], []

    def walk(c):
        if c and isinstance(c[0], (int, float)):
            xs.append(c[0])
            ys.append(c[1])
        else:
            for sub in c:
                walk(sub)

    for ft in doc.get("features", []):
        g = ft.get("geometry", {})
        walk(g.get("rings") or g.get("parts") or g.get("coordinates") or [])
    if not xs:
        return None
    return min(xs), min(ys), max(xs), max(ys)


def chart_projection(doc):
    if doc.get("crs") == "local":
        return LocalFrame()
    if "origin" in doc:
        return Projection(float(doc["origin"][0]), float(doc["origin"][1]))
    bb = _json_bbox(doc)
    return Projection.about_bbox(*bb) if bb else Projection(0.0, 0.0)


def parse_chart_doc(doc, projection=None):
    """Like :func:`parse_chart_json` but from a decoded document; also returns
    (class, feature) pairs and the projection used."""
    if not isinstance(doc, dict) or not isinstance(doc.get("features"), list):
        raise SchemaError("chart document needs a 'features' list")
    if projection is None:
        projection = chart_projection(doc)
    out = []
    for i, ft in enumerate(doc["features"]):
        if not isinstance(ft, dict):
            raise SchemaError(f"feature {i} is not an object")
        for key in ("class", "geometry", "attributes"):
            if key not in ft:
                raise SchemaError(f"feature {i} is missing '{key}'")
        g = ft["geometry"]
        kind = g.get("kind") if isinstance(g, dict) else None
        try:
            if kind == "polygon":
                coords = [[projection.forward(p[0], p[1]) for p in ring] for ring in g["rings"]]
            elif kind == "polyline":
                coords = [[projection.forward(p[0], p[1]) for p in part] for part in g["parts"]]
            elif kind == "point":
                c = g["coordinates"]
                coords = [projection.forward(c[0], c[1])]
            else:
                raise SchemaError(f"feature {i}: geometry kind {kind!r} not supported")
        except (KeyError, TypeError, IndexError) as exc:
            raise SchemaError(f"feature {i}: malformed geometry ({exc})") from exc
        if kind == "polygon":
            for ring in g["rings"]:
                if len(ring) < 4 or list(ring[0]) != list(ring[-1]):
                    raise GeometryError(f"feature {i}: polygon ring not closed or < 4 vertices")
        if not isinstance(ft["attributes"], dict):
            raise SchemaError(f"feature {i}: attributes must be an object")
        out.append((ft["class"], RawFeature(kind, coords, dict(ft["attributes"])).validate()))
    return out, projection


def parse_chart_json(text, projection=None):
    """Parse the JSON chart format into RawFeatures (class names dropped)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    pairs, _ = parse_chart_doc(doc, projection)
    return [f for _, f in pairs]


def chart_to_json(chart, local=False):
    """Serialise a ChartFeatureSet to the JSON chart format.

    Coordinates are unprojected to degrees and the origin is recorded so a
    re-parse lands on identical local coordinates.
    """
    proj = chart.projection
    if local or proj is None or isinstance(proj, LocalFrame):
        inv = LocalFrame().inverse
        doc = {"crs": "local", "features": []}
    else:
        inv = proj.inverse
        doc = {"origin": [proj.lon0, proj.lat0], "features": []}
    for name, layer in chart.layers.items():
        for p, att in zip(layer.points, layer.point_info if hasattr(layer, "point_info") else [{}] * len(layer.points)):
            doc["features"].append({"class": name, "geometry": {"kind": "point", "coordinates": list(inv(*p))},
                                    "attributes": att})
        for line, att in zip(layer.lines, _line_info(layer)):
            doc["features"].append({"class": name,
                                    "geometry": {"kind": "polyline", "parts": [[list(inv(*q)) for q in line]]},
                                    "attributes": att})
        for poly in layer.polygons:
            doc["features"].append({"class": name,
                                    "geometry": {"kind": "polygon",
                                                 "rings": [[list(inv(*q)) for q in ring] for ring in poly.rings]},
                                    "attributes": poly.info.get("attributes", {})})
    return json.dumps(doc, indent=1)


def _line_info(layer):
    n = len(layer.lines)
    src = getattr(layer, "line_info", None)
    return src if src is not None and len(src) == n else [{}] * n


# --------------------------------------------------------------------------
# categorisation


def resolve_depth(attrs):
    """Depth in metres: SOUACC, else VERDAT, else 0 (non-navigable)."""
    for key in ("SOUACC", "VERDAT"):
        val = attrs.get(key)
        if val is not None and val != "":
            return float(val)
    log.warning("depth area without SOUACC/VERDAT; treating as depth 0 (non-navigable)")
    return 0.0


def _ring_bbox(rings):
    xs = [p[0] for ring in rings for p in ring]
    ys = [p[1] for ring in rings for p in ring]
    return (min(xs), min(ys), max(xs), max(ys))


def build_chart_memory(features, classes=DEFAULT_CLASSES, projection=None):
    """Route (class_name, RawFeature) pairs into per-class layers."""
    registered = set(classes)
    layers = {name: _new_layer(name) for name in classes}
    for cls, ft in features:
        if cls not in registered:
            raise UnknownClass(f"feature class {cls!r} is not registered")
        layer = layers[cls]
        attrs = dict(ft.attributes)
        region = str(attrs.get("region") or attrs.get("sourcefile") or "")
        if ft.geometry_kind == "point":
            layer.points.extend(tuple(p) for p in ft.coordinates)
            layer.point_info.extend(dict(attrs) for _ in ft.coordinates)
        elif ft.geometry_kind == "polyline":
            for part in ft.coordinates:
                layer.lines.append([tuple(p) for p in part])
                layer.line_info.append(dict(attrs))
        else:
            rings = [[tuple(p) for p in ring] for ring in ft.coordinates]
            info = {k: v for k, v in attrs.items()}
            info["attributes"] = dict(attrs)
            info["boundingbox"] = _ring_bbox(rings)
            info["region"] = region
            if cls == "depare":
                info["SOUACC"] = attrs.get("SOUACC")
                info["VERDAT"] = attrs.get("VERDAT")
                info["depth"] = resolve_depth(attrs)
            layer.polygons.append(PolygonRecord(rings, info))
            layer.info.append(info)
    return ChartFeatureSet(layers, projection)


def _new_layer(name):
    layer = Layer(name)
    layer.point_info = []
    layer.line_info = []
    return layer


def load_chart(path):
    """Load a chart from a JSON file or a directory of shapefile pairs."""
    if os.path.isdir(path):
        feats, proj = load_shapefile_dir(path)
        return build_chart_memory(feats, projection=proj)
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    pairs, proj = parse_chart_doc(doc)
    classes = tuple(DEFAULT_CLASSES) + tuple(c for c in doc.get("classes", []) if c not in DEFAULT_CLASSES)
    return build_chart_memory(pairs, classes=classes, projection=proj)


# --------------------------------------------------------------------------
# waterway axes


@dataclass
class AxisSegment:
    points: list
    region: str = ""


def clean_waterway_axes(lines, epsilon, regions=None):
    """Drop vertices closer than ``epsilon`` to the last kept one.

    ``lines`` is the wtwaxs layer's line list (or the layer itself). Each part
    becomes one segment; parts left with fewer than two vertices are dropped.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    if isinstance(lines, Layer):
        regions = [str(a.get("region") or a.get("sourcefile") or "") for a in _line_info(lines)]
        lines = lines.lines
    if regions is None:
        regions = [""] * len(lines)
    out = []
    for line, region in zip(lines, regions):
        if isinstance(line, AxisSegment):
            line, region = line.points, line.region
        kept = []
        for p in line:
            p = (float(p[0]), float(p[1]))
            if kept and math.hypot(p[0] - kept[-1][0], p[1] - kept[-1][1]) < epsilon:
                continue
            kept.append(p)
        if len(kept) >= 2:
            out.append(AxisSegment(kept, region))
    return out
