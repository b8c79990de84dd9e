"""Boundary-first Delaunay sets on the collared prototiles of a planar tiling.

Cells of the level-1 Gahler complex are processed by dimension.  Each k-cell
gets a Delaunay set on its theta_k-neighbourhood: the sets already built on
its boundary cells are kept near the boundary, fresh jittered-grid points
fill the rest, and the result is perturbed to genericity visiting the
inherited points first.  Tiles then carry translated copies of their
prototile's set, and the triangulation near each tile is recomputed from
that set alone and compared with the global Delaunay triangulation.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .complex import TilingError, TilingInstance, TruncationError, gahler_complex
from .delaunay import (
    GenericityError,
    MeshError,
    MeshParams,
    PointSet,
    ResourceCapError,
    ThetaSchedule,
    delaunay_complex,
    is_protected,
    perturb_until_generic,
)
from .scalar import SQRT2, as_exact, exact_sign

# ---------------------------------------------------------------------------
# exact planar geometry
# ---------------------------------------------------------------------------


def _sub(p, q):
    return (p[0] - q[0], p[1] - q[1])


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _sq(p, q):
    return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2


def _sq_point_segment(p, a, b):
    d = _sub(b, a)
    w = _sub(p, a)
    dd = d[0] * d[0] + d[1] * d[1]
    s = w[0] * d[0] + w[1] * d[1]
    if exact_sign(s) <= 0:
        return _sq(p, a)
    if exact_sign(s - dd) >= 0:
        return _sq(p, b)
    c = _cross(d, w)
    return c * c / dd


def _orient_ccw(poly):
    area = sum((_cross(poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly))), Fraction(0))
    return list(poly) if exact_sign(area) > 0 else list(reversed(poly))


def _locate(p, poly):
    """1 strictly inside, 0 on the boundary, -1 outside (exact, any simple polygon)."""
    n = len(poly)
    inside = False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if _sq_point_segment(p, a, b) == 0:
            return 0
        if (exact_sign(a[1] - p[1]) > 0) != (exact_sign(b[1] - p[1]) > 0):
            # x-coordinate of the crossing compared with p
            t = _cross(_sub(b, a), _sub(p, a))
            if (exact_sign(t) > 0) == (exact_sign(b[1] - a[1]) > 0):
                inside = not inside
    return 1 if inside else -1


_PROBE = (1, SQRT2)


def _owns(p, poly_ccw) -> bool:
    """Half-open membership: p belongs to the tile containing p + t*(1, sqrt2)
    for small t > 0.  Tiles of a tiling partition the plane under this rule."""
    loc = _locate(p, poly_ccw)
    if loc != 0:
        return loc > 0
    n = len(poly_ccw)
    for i in range(n):
        w = poly_ccw[i]
        if w == tuple(p):
            d1 = _sub(w, poly_ccw[i - 1])
            d2 = _sub(poly_ccw[(i + 1) % n], w)
            left1 = exact_sign(_cross(d1, _PROBE)) > 0
            left2 = exact_sign(_cross(d2, _PROBE)) > 0
            if exact_sign(_cross(d1, d2)) > 0:
                return left1 and left2
            return left1 or left2
    for i in range(n):
        a, b = poly_ccw[i], poly_ccw[(i + 1) % n]
        if _sq_point_segment(p, a, b) == 0:
            s = exact_sign(_cross(_sub(b, a), _PROBE))
            if s == 0:
                raise TilingError("tile edge parallel to the ownership probe direction")
            return s > 0
    return False


def _sq_to_polygon(p, poly):
    if _locate(p, poly) >= 0:
        return Fraction(0)
    return min(_sq_point_segment(p, poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly)))


def _sq_to_boundary(p, poly):
    return min(_sq_point_segment(p, poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly)))


# float filters: decide by floats unless within a relative margin, then exactly

_MARGIN = 1e-12


def _fpt(p):
    return (float(p[0]), float(p[1]))


def _fsq_seg(p, a, b):
    return _fseg_dist(p, a, b) ** 2


def _finside(p, poly):
    inside = False
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x > p[0]:
                inside = not inside
    return inside


class _Region:
    """Squared distance to a finite point set, a segment, a filled polygon or a polygon boundary."""

    def __init__(self, kind, verts):
        self.kind = kind
        self.verts = [tuple(v) for v in verts]
        self.fverts = [_fpt(v) for v in self.verts]
        self.scale = max(1.0, max(abs(c) for v in self.fverts for c in v))

    def exact(self, p):
        v = self.verts
        if self.kind == "points":
            return min(_sq(p, q) for q in v)
        if self.kind == "segment":
            return _sq_point_segment(p, v[0], v[1])
        if self.kind == "polygon":
            return _sq_to_polygon(p, v)
        return _sq_to_boundary(p, v)

    def approx(self, fp):
        v = self.fverts
        if self.kind == "points":
            return min((fp[0] - q[0]) ** 2 + (fp[1] - q[1]) ** 2 for q in v)
        if self.kind == "segment":
            return _fsq_seg(fp, v[0], v[1])
        d = min(_fsq_seg(fp, v[i], v[(i + 1) % len(v)]) for i in range(len(v)))
        if self.kind == "polygon" and _finside(fp, v):
            return -d
        return d

    def within(self, p, t2, fp=None) -> bool:
        """Exact test of dist(p)^2 < t2 (dist 0 inside a filled polygon)."""
        f = self.approx(fp if fp is not None else _fpt(p))
        tf = float(t2)
        slack = _MARGIN * (self.scale * self.scale + tf)
        if f < tf - slack and not (self.kind == "polygon" and -slack < f < slack):
            return True
        if f > tf + slack:
            return False
        return exact_sign(self.exact(p) - t2) < 0


def _owns_fast(p, region: "_Region") -> bool:
    """_owns with a float shortcut away from the polygon boundary."""
    f = region.approx(_fpt(p))
    slack = _MARGIN * region.scale * region.scale
    if f < -slack:
        return True
    if f > slack:
        return False
    return _owns(p, region.verts)


# float helpers for the theta schedule


def _fseg_dist(p, a, b):
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    dd = dx * dx + dy * dy
    s = 0.0 if dd == 0 else max(0.0, min(1.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / dd))
    return math.hypot(p[0] - ax - s * dx, p[1] - ay - s * dy)


def _fseg_seg(a, b, c, d):
    def cr(o, p, q):
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])
    d1, d2, d3, d4 = cr(c, d, a), cr(c, d, b), cr(a, b, c), cr(a, b, d)
    if (d1 > 0) != (d2 > 0) and (d3 > 0) != (d4 > 0) and 0 not in (d1, d2, d3, d4):
        return 0.0
    return min(_fseg_dist(a, c, d), _fseg_dist(b, c, d), _fseg_dist(c, a, b), _fseg_dist(d, a, b))


def _clip_outside_disk(a, b, centre, t):
    """Pieces of segment ab outside the open disk of radius t about centre."""
    ux, uy = b[0] - a[0], b[1] - a[1]
    wx, wy = a[0] - centre[0], a[1] - centre[1]
    A = ux * ux + uy * uy
    B = 2 * (ux * wx + uy * wy)
    C = wx * wx + wy * wy - t * t
    disc = B * B - 4 * A * C
    if disc <= 0:
        return [(a, b)]
    r = math.sqrt(disc)
    s1, s2 = (-B - r) / (2 * A), (-B + r) / (2 * A)
    pieces = []
    for lo, hi in ((0.0, min(1.0, s1)), (max(0.0, s2), 1.0)):
        if hi > lo:
            pieces.append(((a[0] + lo * ux, a[1] + lo * uy), (a[0] + hi * ux, a[1] + hi * uy)))
    return pieces


def _rational_below(x: float) -> Fraction:
    """A rational slightly below a positive float."""
    q = Fraction(math.floor(x * (1 - 1e-9) * 2 ** 24), 2 ** 24)
    if q <= 0:
        raise MeshError("theta underflow")
    return q


def _sqrt_below(x) -> Fraction:
    """Exact square root of a rational square, else a rational just below it."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
    return _rational_below(math.sqrt(float(x)))


def theta_schedule(prototiles) -> ThetaSchedule:
    """Separation radii for planar polygonal prototiles.

    theta_0 = R_0/4 with R_0 the least distance between two vertices of a
    prototile; theta_1 = min(R_1/4, theta_0/2) where R_1 is the least
    distance between an edge and another vertex or edge of the same
    prototile after removing the theta_0-disk about their common vertex;
    theta_2 = theta_1/2.  Straight cells are tubular at every radius.
    """
    r0sq = None
    r1 = math.inf
    for poly in prototiles:
        n = len(poly)
        for i in range(n):
            for j in range(i + 1, n):
                d2 = _sq(poly[i], poly[j])
                if r0sq is None or exact_sign(d2 - r0sq) < 0:
                    r0sq = d2
    if r0sq is None or r0sq == 0:
        raise MeshError("prototile with coincident vertices")
    th0 = _sqrt_below(r0sq) / 4
    polys = [[tuple(float(c) for c in p) for p in poly] for poly in prototiles]
    t0 = float(th0)
    for poly in polys:
        n = len(poly)
        edges = [(i, (i + 1) % n) for i in range(n)]
        for ei, (a, b) in enumerate(edges):
            for w in range(n):
                if w not in (a, b):
                    r1 = min(r1, _fseg_dist(poly[w], poly[a], poly[b]))
            for ej, (c, d) in enumerate(edges):
                if ej == ei:
                    continue
                common = {a, b} & {c, d}
                if len(common) == 2:
                    raise TilingError("two edges of a prototile share both endpoints")
                if not common:
                    r1 = min(r1, _fseg_seg(poly[a], poly[b], poly[c], poly[d]))
                    continue
                beta = poly[common.pop()]
                p1 = _clip_outside_disk(poly[a], poly[b], beta, t0)
                p2 = _clip_outside_disk(poly[c], poly[d], beta, t0)
                for s in p1:
                    for u in p2:
                        r1 = min(r1, _fseg_seg(s[0], s[1], u[0], u[1]))
    th1 = min(_rational_below(r1 / 4) if math.isfinite(r1) else th0, th0 / 2)
    return ThetaSchedule([th0, th1, th1 / 2])


def check_geometric_normality(t: TilingInstance):
    """Tiles meeting at all must meet in one connected piece."""
    seen = set()
    edges_of = {tile: set(t.tile_faces(tile)[1]) for tile in t.tiles}
    for v in range(len(t.vertices)):
        for a in t.vertex_tiles[v]:
            for b in t.vertex_tiles[v]:
                if a >= b or (a, b) in seen:
                    continue
                seen.add((a, b))
                verts = set(t.tile_vertices(a)) & set(t.tile_vertices(b))
                shared = edges_of[a] & edges_of[b]
                parent = {x: x for x in verts}

                def find(x):
                    while parent[x] != x:
                        x = parent[x]
                    return x
                for e in shared:
                    u, w = t.cell_vertices[1][e]
                    parent[find(u)] = find(w)
                if len({find(x) for x in verts}) > 1:
                    raise TilingError(f"tiles {a} and {b} meet in a disconnected set")


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


@dataclass
class CollaredTriangulation:
    theta: ThetaSchedule
    mesh: MeshParams
    r: Fraction
    spacing: Fraction
    cell_sets: dict  # (k, gahler cell) -> points in the representative cell's position
    moved: dict  # (k, gahler cell) -> number of points moved by the perturbation
    patch: list
    tile_triangles: dict  # patch tile -> triangles (frozensets of exact points) from the global set
    local_triangles: dict  # patch tile -> triangles recomputed from the tile's own set
    checks: dict = field(default_factory=dict)

    def prototile_set(self, g):
        return self.cell_sets[(2, g)]

    def to_json(self):
        return {
            "theta": self.theta.to_json(),
            "eps": str(self.mesh.eps),
            "r": str(self.r),
            "spacing": str(self.spacing),
            "cell_sets": {f"{k}:{g}": len(v) for (k, g), v in sorted(self.cell_sets.items())},
            "moved": {f"{k}:{g}": m for (k, g), m in sorted(self.moved.items())},
            "patch": self.patch,
            "triangles": sum(len(v) for v in self.tile_triangles.values()),
            "checks": self.checks,
        }


class _Geometry:
    """Representative positions of Gahler cells and translations onto fragment cells."""

    def __init__(self, t, cx, proj):
        self.t = t
        self.proj = proj
        self.rep = {k: {g: min(cells) for g, cells in proj.fibers(k).items()} for k in range(3)}

    def points_of(self, k, c):
        return [tuple(self.t.vertices[v].coords) for v in self.t.cell_vertices[k][c]]

    def ref(self, k, c):
        return min(self.points_of(k, c))

    def shift(self, k, c):
        g = self.proj.maps[k][c][0]
        a, b = self.ref(k, c), self.ref(k, self.rep[k][g])
        return (a[0] - b[0], a[1] - b[1]), g

    def polygon(self, c):
        return _orient_ccw(self.points_of(2, c))


def _jittered_grid(lo, hi, anchor, h, key):
    """Grid points anchor + h*(i + jitter, j + jitter) inside the box [lo, hi]."""
    pts = []
    i0 = math.floor((lo[0] - anchor[0]) / h) - 1
    i1 = math.ceil((hi[0] - anchor[0]) / h) + 1
    j0 = math.floor((lo[1] - anchor[1]) / h) - 1
    j1 = math.ceil((hi[1] - anchor[1]) / h) + 1
    scale = 1 << 10
    for i in range(i0, i1 + 1):
        for j in range(j0, j1 + 1):
            rng = random.Random(f"{key}:{i}:{j}")
            jx = Fraction(rng.randint(-scale, scale), 20 * scale)
            jy = Fraction(rng.randint(-scale, scale), 20 * scale)
            pts.append((anchor[0] + h * (i + jx), anchor[1] + h * (j + jy)))
    return pts


def _stage(points_inherited, region, boundary, theta_k, theta_prev, r, h, mesh, seed,
           fresh_box, anchor, key):
    """Delaunay set on N_theta_k of one cell, extending the inherited boundary set."""
    tk2 = theta_k * theta_k
    inherited = [p for p in dict.fromkeys(points_inherited) if region.within(p, tk2)]
    tp2 = theta_prev * theta_prev if theta_prev is not None else None
    fresh = []
    for p in _jittered_grid(fresh_box[0], fresh_box[1], anchor, h, key):
        fp = _fpt(p)
        if not region.within(p, tk2, fp):
            continue
        if tp2 is not None and boundary.within(p, tp2, fp):
            continue
        fresh.append(p)
    if inherited and fresh:
        near = PointSet(inherited).kd
        keep = near.query_ball_point([_fpt(p) for p in fresh], float(h) / 2)
        fresh = [p for p, hits in zip(fresh, keep) if not hits]
    pts = list(dict.fromkeys(inherited + fresh))
    # frozen band: every short simplex touching it was protected by the previous stage
    safe_prev = theta_prev - 3 * r if theta_prev is not None else None
    frozen = set()
    if safe_prev is not None and safe_prev > 0:
        sp2 = safe_prev * safe_prev
        frozen = {i for i, p in enumerate(pts) if boundary.within(p, sp2)}
    order = sorted(frozen, key=lambda i: pts[i]) + sorted(
        (i for i in range(len(pts)) if i not in frozen), key=lambda i: pts[i])
    inner = theta_k - 2 * r
    cell = region

    def relevant(rec):
        if rec.circumradius > float(r):
            return False
        c = rec.circumcenter
        if cell.kind == "polygon" and cell.within(c, Fraction(0)):
            return True
        if inner > 0:
            return cell.within(c, inner * inner)
        return cell.exact(c) == 0

    ps = PointSet(pts)
    movable = set(range(len(pts))) - frozen
    res = perturb_until_generic(ps, mesh, order=order, seed=seed, relevant=relevant,
                                movable=movable, window=6 * float(mesh.eps))
    out = [p for p in res.points.points if region.within(p, tk2)]
    # the frozen band is unchanged; the wider band theta_prev - r is only reported
    agree = {}
    for name, rad in (("frozen_band", safe_prev), ("boundary_band", theta_prev - r if theta_prev else None)):
        if rad is None or rad <= 0:
            continue
        rad2 = rad * rad
        lhs = {p for p in out if boundary.within(p, rad2)}
        rhs = {p for p in inherited if boundary.within(p, rad2)}
        agree[name] = lhs == rhs
    if agree.get("frozen_band") is False:
        raise GenericityError("perturbation changed inherited points near the boundary")
    return out, len(res.moved), agree


def _triangles(points, owner_poly):
    """Delaunay triangles whose centroid is owned by the polygon."""
    res = delaunay_complex(PointSet(points))
    owner = _Region("polygon", owner_poly)
    out = set()
    for s in res.simplices:
        tri = [res.points.points[i] for i in s]
        cen = (sum(p[0] for p in tri) / 3, sum(p[1] for p in tri) / 3)
        if _owns_fast(cen, owner):
            out.add(frozenset(tri))
    return out, res


def _estimate(polys, theta, h):
    total = 0.0
    for poly in polys:
        xs = [float(p[0]) for p in poly]
        ys = [float(p[1]) for p in poly]
        w = max(xs) - min(xs) + 2 * float(theta[0])
        hh = max(ys) - min(ys) + 2 * float(theta[0])
        total += w * hh
    return total / float(h) ** 2


def triangulate_collared_prototiles(t: TilingInstance, mesh: MeshParams | None = None, *,
                                    enforce_epsilon: bool = True, r_factor=10,
                                    max_points: int = 200_000, seed: int = 0,
                                    patch: list | None = None) -> CollaredTriangulation:
    """Boundary-consistent generic Delaunay sets on the collared prototiles of a
    planar polygonal tiling, glued over a patch and checked against the global
    Delaunay triangulation.

    ``mesh.eps`` must be below theta_2/100 unless ``enforce_epsilon`` is off;
    the interaction radius is r = r_factor * eps.  Raises ResourceCapError
    when the estimated point count exceeds ``max_points``.
    """
    if not (t.group.is_abelian and t.group.dim == 2 and t.dim == 2):
        raise TilingError("collared prototile triangulation is implemented for planar tilings")
    check_geometric_normality(t)
    cx, proj = gahler_complex(t, 1)
    geo = _Geometry(t, cx, proj)
    prototiles = {g: geo.polygon(c) for g, c in geo.rep[2].items()}
    theta = theta_schedule(list(prototiles.values()))
    if mesh is None:
        eps = theta[2] / 101
        mesh = MeshParams(1, eps, eps / 1000, eps / 8)
    eps = mesh.eps
    if enforce_epsilon and not eps < theta[2] / 100:
        raise MeshError(f"eps {eps} is not below theta_2/100 = {theta[2] / 100}")
    r = as_exact(r_factor) * eps
    h = eps * Fraction(5, 4)
    estimate = _estimate(prototiles.values(), theta, h) * 3
    if estimate > max_points:
        raise ResourceCapError(f"about {estimate:.3g} mesh points needed (eps = {float(eps):.3g}, "
                               f"theta = {[float(x) for x in theta.thetas]}); cap is {max_points}")
    cell_sets = {}
    moved = {}
    bands = {}
    # vertices
    for g, c in sorted(geo.rep[0].items()):
        v = geo.points_of(0, c)[0]
        box = ((v[0] - theta[0], v[1] - theta[0]), (v[0] + theta[0], v[1] + theta[0]))
        pts, m, _ = _stage([], _Region("points", [v]), None, theta[0], None, r, h, mesh, seed, box, v,
                           f"{seed}:0:{g}")
        cell_sets[(0, g)] = pts
        moved[(0, g)] = m
    # edges
    for g, c in sorted(geo.rep[1].items()):
        a, b = geo.points_of(1, c)
        inherited = []
        for u in t.cell_vertices[1][c]:
            (dx, dy), gv = geo.shift(0, u)
            inherited += [(p[0] + dx, p[1] + dy) for p in cell_sets[(0, gv)]]
        lo = (min(a[0], b[0]) - theta[1], min(a[1], b[1]) - theta[1])
        hi = (max(a[0], b[0]) + theta[1], max(a[1], b[1]) + theta[1])
        pts, m, ag = _stage(inherited, _Region("segment", [a, b]), _Region("points", [a, b]), theta[1],
                            theta[0], r, h, mesh, seed, (lo, hi), min(a, b), f"{seed}:1:{g}")
        cell_sets[(1, g)] = pts
        moved[(1, g)] = m
        bands[(1, g)] = ag
    # faces
    for g, c in sorted(geo.rep[2].items()):
        poly = prototiles[g]
        inherited = []
        for e in t.tile_faces(c)[1]:
            (dx, dy), ge = geo.shift(1, e)
            inherited += [(p[0] + dx, p[1] + dy) for p in cell_sets[(1, ge)]]
        lo = (min(p[0] for p in poly) - theta[2], min(p[1] for p in poly) - theta[2])
        hi = (max(p[0] for p in poly) + theta[2], max(p[1] for p in poly) + theta[2])
        pts, m, ag = _stage(inherited, _Region("polygon", poly), _Region("boundary", poly), theta[2],
                            theta[1], r, h, mesh, seed, (lo, hi), min(poly), f"{seed}:2:{g}")
        cell_sets[(2, g)] = pts
        moved[(2, g)] = m
        bands[(2, g)] = ag
    result = CollaredTriangulation(theta, mesh, r, h, cell_sets, moved, [], {}, {})
    _assemble(t, geo, result, patch)
    result.checks["safe_insides"] = all(b.get("frozen_band", True) for b in bands.values())
    result.checks["boundary_band_unchanged"] = all(b.get("boundary_band", True) for b in bands.values())
    return result


def _tile_set(geo, result, tile):
    (dx, dy), g = geo.shift(2, tile)
    return [(p[0] + dx, p[1] + dy) for p in result.cell_sets[(2, g)]], (dx, dy), g


def _assemble(t, geo, result, patch):
    sat = set(geo.proj.tile_class)
    if patch is None:
        patch = sorted(sat)
    patch = sorted(patch)
    if not patch:
        raise TruncationError("no tile with a complete collar is available for assembly")
    result.patch = patch
    theta_n = result.theta[2]
    tn2 = theta_n * theta_n
    sets = {tile: _tile_set(geo, result, tile) for tile in patch}
    # agreement of neighbouring tiles' sets near their common cells
    agree = True
    for a in patch:
        for b in patch:
            if a >= b:
                continue
            verts = set(t.tile_vertices(a)) & set(t.tile_vertices(b))
            if not verts:
                continue
            shared_e = set(t.tile_faces(a)[1]) & set(t.tile_faces(b)[1])
            segs = [tuple(tuple(t.vertices[v].coords) for v in t.cell_vertices[1][e]) for e in shared_e]
            pts = [tuple(t.vertices[v].coords) for v in verts]

            regions = [_Region("points", pts)] + [_Region("segment", s) for s in segs]

            def near(p):
                fp = _fpt(p)
                return any(reg.within(p, tn2, fp) for reg in regions)
            if {p for p in sets[a][0] if near(p)} != {p for p in sets[b][0] if near(p)}:
                agree = False
    # local triangulations from each prototile's own set, one per class
    per_class = {}
    for tile in patch:
        _, _, g = sets[tile]
        if g not in per_class:
            c = geo.rep[2][g]
            tris, _ = _triangles(result.cell_sets[(2, g)], geo.polygon(c))
            per_class[g] = tris
    local = {}
    for tile in patch:
        _, (dx, dy), g = sets[tile]
        local[tile] = {frozenset((p[0] + dx, p[1] + dy) for p in tri) for tri in per_class[g]}
    # global triangulation of the union
    union = list(dict.fromkeys(p for tile in patch for p in sets[tile][0]))
    res = delaunay_complex(PointSet(union))
    polys = {tile: _Region("polygon", geo.polygon(tile)) for tile in patch}
    glob = {tile: set() for tile in patch}
    protected = True
    delta = result.mesh.delta
    for s in res.simplices:
        tri = [res.points.points[i] for i in s]
        cen = (sum(p[0] for p in tri) / 3, sum(p[1] for p in tri) / 3)
        for tile in patch:
            if _owns_fast(cen, polys[tile]):
                glob[tile].add(frozenset(tri))
                if res.records[s].cospherical or not is_protected(res.points, s, delta):
                    protected = False
                break
    result.tile_triangles = glob
    result.local_triangles = local
    result.checks = {
        "collar_agreement": agree,
        "local_equals_global": all(glob[tile] == local[tile] for tile in patch),
        "union_generic": protected,
        "union_points": len(union),
    }
