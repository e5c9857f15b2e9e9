"""Hand-packed shapefile/dBASE byte fixtures (no third-party writer)."""
import struct


def shp_bytes(shape_type, records, bbox=(0.0, 0.0, 0.0, 0.0)):
    """``records`` are already-packed content blobs."""
    body = b""
    for i, content in enumerate(records, 1):
        body += struct.pack(">ii", i, len(content) // 2) + content
    total = 100 + len(body)
    head = struct.pack(">i", 9994) + b"\x00" * 20 + struct.pack(">i", total // 2)
    head += struct.pack("<ii", 1000, shape_type) + struct.pack("<4d", *bbox) + b"\x00" * 32
    return head + body


def point_content(x, y):
    return struct.pack("<i2d", 1, x, y)


def poly_content(shape_type, parts):
    pts = [p for part in parts for p in part]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    out = struct.pack("<i4d", shape_type, min(xs), min(ys), max(xs), max(ys))
    out += struct.pack("<ii", len(parts), len(pts))
    idx = 0
    for part in parts:
        out += struct.pack("<i", idx)
        idx += len(part)
    for p in pts:
        out += struct.pack("<2d", *p)
    return out


def dbf_bytes(fields, rows):
    """``fields``: (name, type, length, decimals); ``rows``: tuples of str."""
    hlen = 32 + 32 * len(fields) + 1
    rlen = 1 + sum(f[2] for f in fields)
    out = struct.pack("<B3BIHH20x", 3, 124, 1, 1, len(rows), hlen, rlen)
    for name, ftype, flen, dec in fields:
        out += name.encode().ljust(11, b"\x00") + ftype.encode() + b"\x00" * 4
        out += struct.pack("<BB", flen, dec) + b"\x00" * 14
    out += b"\x0d"
    for row in rows:
        rec = b" "
        for (name, ftype, flen, dec), val in zip(fields, row):
            s = str(val).encode()
            rec += s.rjust(flen) if ftype in "NF" else s.ljust(flen)
        out += rec
    return out + b"\x1a"
