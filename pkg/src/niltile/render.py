"""Plain SVG pictures of point sets and tilings (display only).

Heisenberg data is drawn in the (x, y) plane with the z coordinate mapped
to colour.
"""
from __future__ import annotations

from xml.sax.saxutils import escape


def _colour(t: float) -> str:
    # blue -> red ramp
    t = min(1.0, max(0.0, t))
    return f"rgb({int(255 * t)},{int(80 + 60 * (1 - abs(2 * t - 1)))},{int(255 * (1 - t))})"


def _frame(xs, ys, size):
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 0.05 * span

    def tx(x, y):
        return ((x - x0 + pad) / (span + 2 * pad) * size, size - (y - y0 + pad) / (span + 2 * pad) * size)
    return tx


def svg_points(points, size: int = 600, title: str = "") -> str:
    """Dots at the (x, y) projection, coloured by the third coordinate if any."""
    pts = [[float(c) for c in p] for p in points]
    xs = [p[0] for p in pts]
    ys = [p[1] if len(p) > 1 else 0.0 for p in pts]
    zs = [p[2] for p in pts] if pts and len(pts[0]) > 2 else None
    tx = _frame(xs, ys, size)
    zlo, zhi = (min(zs), max(zs)) if zs else (0.0, 1.0)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    if title:
        out.append(f"<title>{escape(title)}</title>")
    for i, (x, y) in enumerate(zip(xs, ys)):
        u, v = tx(x, y)
        fill = _colour((zs[i] - zlo) / (zhi - zlo)) if zs and zhi > zlo else "black"
        out.append(f'<circle cx="{u:.2f}" cy="{v:.2f}" r="2" fill="{fill}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_tiling(t, size: int = 600) -> str:
    """Edges of a tiling projected to the (x, y) plane."""
    verts = [[float(c) for c in v.coords] for v in t.vertices]
    xs = [v[0] for v in verts]
    ys = [v[1] if len(v) > 1 else 0.0 for v in verts]
    zs = [v[2] for v in verts] if verts and len(verts[0]) > 2 else None
    tx = _frame(xs, ys, size)
    zlo, zhi = (min(zs), max(zs)) if zs else (0.0, 1.0)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
           f"<title>{escape(t.name)}</title>"]
    for a, b in t.cell_vertices[1] if t.dim >= 1 else []:
        (u1, v1), (u2, v2) = tx(xs[a], ys[a]), tx(xs[b], ys[b])
        colour = "black"
        if zs and zhi > zlo:
            colour = _colour(((zs[a] + zs[b]) / 2 - zlo) / (zhi - zlo))
        out.append(f'<line x1="{u1:.2f}" y1="{v1:.2f}" x2="{u2:.2f}" y2="{v2:.2f}" '
                   f'stroke="{colour}" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
