"""Tiling fragments, coronae, collared prototiles and Gahler complexes.

A :class:`TilingInstance` is a finite polyhedral cell complex whose vertices
are group elements.  Cells of every dimension are stored with their vertex
tuple (ordered: edges tail to head, polygons counterclockwise or by template)
and a boundary list of ``(face index, sign)``.  For 2-cells the boundary list
is in cyclic order, so it doubles as the boundary word of the cell.

Orientations are assigned by builders from the lattice coordinates of the
vertices, so translated copies of a cell carry translated orientations.  This
is what makes the quotient by translation classes sign-free.
"""
from __future__ import annotations

import math
from collections import defaultdict, deque
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .nilgroup import CANONICAL, POLARIZED, Group, GroupElement
from .scalar import as_exact, exact_sign


class TilingError(ValueError):
    pass


class TruncationError(TilingError):
    """A corona reaches the boundary of a finite fragment."""


# ---------------------------------------------------------------------------
# cell complexes
# ---------------------------------------------------------------------------


class CellComplex:
    """Finite CW complex with oriented cells and integer boundary matrices.

    ``cells[k][i]`` is the boundary list of the i-th k-cell as ``(face, sign)``
    pairs; ``cells[0]`` holds empty lists.  For 1-cells the list is
    ``[(head, +1), (tail, -1)]``.  For 2-cells it is in cyclic order.
    """

    def __init__(self, cells: Sequence[Sequence], labels: Sequence | None = None):
        self.cells = [[list(b) for b in level] for level in cells]
        self.labels = list(labels) if labels is not None else [None] * len(self.cells[-1])
        self._boundaries = None

    @property
    def dim(self) -> int:
        return len(self.cells) - 1

    @property
    def counts(self) -> list:
        return [len(level) for level in self.cells]

    @property
    def boundaries(self) -> list:
        """``boundaries[k]`` is the dense counts[k-1] x counts[k] integer matrix."""
        if self._boundaries is None:
            out = [None]
            for k in range(1, self.dim + 1):
                m = [[0] * len(self.cells[k]) for _ in range(len(self.cells[k - 1]))]
                for j, bd in enumerate(self.cells[k]):
                    for face, sign in bd:
                        m[face][j] += sign
                out.append(m)
            self._boundaries = out
        return self._boundaries

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.counts))

    def boundary_squares_vanish(self) -> bool:
        b = self.boundaries
        for k in range(2, self.dim + 1):
            for j in range(self.counts[k]):
                acc = defaultdict(int)
                for face, s in self.cells[k][j]:
                    for f2, s2 in self.cells[k - 1][face]:
                        acc[f2] += s * s2
                if any(acc.values()):
                    return False
        return True

    def edge_ends(self, e: int) -> tuple:
        """(tail, head) of a 1-cell."""
        bd = self.cells[1][e]
        head = next(f for f, s in bd if s > 0)
        tail = next(f for f, s in bd if s < 0)
        return tail, head

    def boundary_word(self, c: int) -> list:
        """Cyclic boundary word of a 2-cell as (edge, sign) pairs."""
        return list(self.cells[2][c])

    def to_json(self):
        return {
            "counts": self.counts,
            "cells": [[[[int(f), int(s)] for f, s in bd] for bd in level] for level in self.cells],
            "labels": [str(x) if x is not None else None for x in self.labels],
            "euler_characteristic": self.euler_characteristic(),
        }

    @classmethod
    def from_json(cls, data):
        cells = [[[(int(f), int(s)) for f, s in bd] for bd in level] for level in data["cells"]]
        return cls(cells, data.get("labels"))


# ---------------------------------------------------------------------------
# tiling fragments
# ---------------------------------------------------------------------------


class TilingInstance:
    """Finite fragment of a tiling of a nilpotent group."""

    def __init__(self, group: Group, vertices: Sequence[GroupElement],
                 cell_vertices: Sequence[Sequence[tuple]],
                 cell_boundaries: Sequence[Sequence[list]],
                 labels: Sequence[str], name: str = "tiling"):
        """``cell_vertices[k]`` and ``cell_boundaries[k]`` for k = 1..d are
        passed as lists indexed from dimension 1 (index 0 is dimension 1)."""
        self.group = group
        self.vertices = list(vertices)
        self.cell_vertices = [[(i,) for i in range(len(self.vertices))]] + [
            [tuple(c) for c in level] for level in cell_vertices]
        self.cell_boundaries = [[[] for _ in self.vertices]] + [
            [list(b) for b in level] for level in cell_boundaries]
        self.labels = list(labels)
        self.name = name
        if len(self.labels) != len(self.cell_vertices[-1]):
            raise TilingError("one label per top cell required")
        self._faces = None
        self._vertex_tiles = None
        self._boundary_vertices = None
        self._vertex_index = None
        self._inverses = None
        self._anchors = {}

    # -- structure ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.cell_vertices) - 1

    @property
    def tiles(self) -> range:
        return range(len(self.cell_vertices[-1]))

    @property
    def counts(self) -> list:
        return [len(c) for c in self.cell_vertices]

    def as_complex(self) -> CellComplex:
        return CellComplex(self.cell_boundaries, self.labels)

    def tile_faces(self, t: int) -> list:
        """All faces of tile ``t`` grouped by dimension (including itself)."""
        if self._faces is None:
            self._faces = [self._collect_faces(i) for i in self.tiles]
        return self._faces[t]

    def _collect_faces(self, t):
        d = self.dim
        faces = [set() for _ in range(d + 1)]
        faces[d].add(t)
        for k in range(d, 0, -1):
            for c in faces[k]:
                for f, _ in self.cell_boundaries[k][c]:
                    faces[k - 1].add(f)
        return [sorted(s) for s in faces]

    def tile_vertices(self, t: int) -> list:
        return self.tile_faces(t)[0]

    @property
    def vertex_tiles(self) -> list:
        if self._vertex_tiles is None:
            vt = [[] for _ in self.vertices]
            for t in self.tiles:
                for v in self.tile_vertices(t):
                    vt[v].append(t)
            self._vertex_tiles = vt
        return self._vertex_tiles

    @property
    def boundary_vertices(self) -> set:
        """Vertices on a codimension-one face that belongs to only one tile."""
        if self._boundary_vertices is None:
            d = self.dim
            owners = defaultdict(int)
            for t in self.tiles:
                for f, _ in self.cell_boundaries[d][t]:
                    owners[f] += 1
            bv = set()
            for f, n in owners.items():
                if n == 1:
                    if d == 1:
                        bv.add(f)
                    else:
                        bv.update(self._cell_vertex_set(d - 1, f))
            self._boundary_vertices = bv
        return self._boundary_vertices

    def _cell_vertex_set(self, k, c):
        if k == 0:
            return {c}
        out = set()
        stack = [(k, c)]
        while stack:
            kk, cc = stack.pop()
            if kk == 0:
                out.add(cc)
            else:
                stack.extend((kk - 1, f) for f, _ in self.cell_boundaries[kk][cc])
        return out

    def check(self) -> list:
        """Structural checks; returns a list of failure messages."""
        problems = []
        if not self.as_complex().boundary_squares_vanish():
            problems.append("boundary of boundary is nonzero")
        used = set()
        for t in self.tiles:
            used.update(self.tile_vertices(t))
        if len(used) != len(self.vertices):
            problems.append("vertex not in any tile")
        if len(set(self.vertices)) != len(self.vertices):
            problems.append("duplicate vertices")
        return problems

    def vertex_index(self, g: GroupElement) -> int | None:
        if self._vertex_index is None:
            self._vertex_index = {v: i for i, v in enumerate(self.vertices)}
        return self._vertex_index.get(g)

    # -- translation classes ---------------------------------------------

    def anchor(self, t: int) -> int:
        """Lexicographically smallest vertex of a tile (left-invariant choice)."""
        a = self._anchors.get(t)
        if a is None:
            a = self._anchors[t] = min(self.tile_vertices(t),
                                       key=lambda v: self.vertices[v].canonical_coords)
        return a

    def relative(self, a: int, v: int) -> tuple:
        return (self._inverse(a) * self.vertices[v]).canonical_coords

    def _inverse(self, a: int) -> GroupElement:
        if self._inverses is None:
            self._inverses = {}
        inv = self._inverses.get(a)
        if inv is None:
            inv = self._inverses[a] = self.vertices[a].inverse()
        return inv

    def relative_shape(self, a: int, t: int) -> tuple:
        """Sorted vertex coordinates of tile ``t`` seen from vertex ``a``."""
        inv = self._inverse(a)
        return tuple(sorted((inv * self.vertices[v]).canonical_coords for v in self.tile_vertices(t)))

    def cell_shape(self, a: int, k: int, c: int) -> tuple:
        """Translation-invariant description of a k-cell relative to vertex ``a``."""
        return (k, tuple(self.relative(a, v) for v in self.cell_vertices[k][c]))

    def tile_key(self, t: int) -> tuple:
        return (self.labels[t], self.relative_shape(self.anchor(t), t))

    # -- coronae ----------------------------------------------------------

    def corona_rings(self, seed_tiles: Iterable[int], n: int) -> list:
        rings = [sorted(set(seed_tiles))]
        seen = set(rings[0])
        for level in range(1, n + 1):
            nxt = set()
            for t in rings[-1]:
                for v in self.tile_vertices(t):
                    if v in self.boundary_vertices:
                        raise TruncationError(
                            f"corona {level} around {rings[0]} reaches the fragment boundary")
                    for u in self.vertex_tiles[v]:
                        if u not in seen:
                            nxt.add(u)
            seen.update(nxt)
            rings.append(sorted(nxt))
        return rings

    def corona(self, seed, n: int) -> list:
        """Tiles of the n-th corona around a tile index or a point.

        A point seed (GroupElement) starts from the tiles containing it; this
        needs Euclidean geometry.
        """
        if isinstance(seed, GroupElement):
            start = tiles_containing(self, seed)
            if not start:
                raise TilingError("seed point is not covered by the fragment")
        else:
            start = [int(seed)]
        rings = self.corona_rings(start, n)
        return sorted(t for r in rings for t in r)

    def is_saturated(self, t: int, n: int) -> bool:
        try:
            self.corona_rings([t], n)
        except TruncationError:
            return False
        return True

    def collared_key(self, t: int, n: int) -> tuple:
        a = self.anchor(t)
        rel = [(self.labels[u], self.relative_shape(a, u)) for u in self.corona(t, n)]
        return (self.labels[t], tuple(sorted(rel)))

    # -- serialization ------------------------------------------------------

    def to_json(self):
        return {
            "name": self.name,
            "group": self.group.to_json(),
            "convention": self.vertices[0].convention if self.vertices else self.group.default_convention,
            "vertices": [v.to_json()["coords"] for v in self.vertices],
            "cells": [
                {"vertices": [list(c) for c in self.cell_vertices[k]],
                 "boundary": [[[f, s] for f, s in b] for b in self.cell_boundaries[k]]}
                for k in range(1, self.dim + 1)
            ],
            "labels": self.labels,
        }

    @classmethod
    def from_json(cls, data):
        group = Group.from_json(data["group"], data.get("convention"))
        conv = data.get("convention", group.default_convention)
        verts = [GroupElement.from_json(group, {"coords": c, "convention": conv})
                 for c in data["vertices"]]
        cv = [[tuple(c) for c in lvl["vertices"]] for lvl in data["cells"]]
        cb = [[[(int(f), int(s)) for f, s in b] for b in lvl["boundary"]] for lvl in data["cells"]]
        return cls(group, verts, cv, cb, data["labels"], data.get("name", "tiling"))


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


class _Builder:
    """Deduplicating cell builder keyed by lattice coordinates."""

    def __init__(self, dim: int):
        self.keys: list = []
        self.index: dict = {}
        self.cells = [[] for _ in range(dim)]  # vertex tuples per dim 1..d
        self.bounds = [[] for _ in range(dim)]
        self.cell_index = [dict() for _ in range(dim)]
        self.labels: list = []

    def vertex(self, key) -> int:
        i = self.index.get(key)
        if i is None:
            i = len(self.keys)
            self.index[key] = i
            self.keys.append(key)
        return i

    def edge(self, a, b) -> tuple:
        """Edge between lattice keys ``a`` and ``b``; returns (index, sign of a->b)."""
        ia, ib = self.vertex(a), self.vertex(b)
        tail, head, sign = (ia, ib, 1) if a < b else (ib, ia, -1)
        i = self.cell_index[0].get((tail, head))
        if i is None:
            i = len(self.cells[0])
            self.cell_index[0][(tail, head)] = i
            self.cells[0].append((tail, head))
            self.bounds[0].append([(head, 1), (tail, -1)])
        return i, sign

    def polygon(self, keys, dedupe_key=None) -> int:
        """2-cell with boundary following ``keys`` cyclically."""
        verts = tuple(self.vertex(k) for k in keys)
        dk = dedupe_key if dedupe_key is not None else frozenset(verts)
        i = self.cell_index[1].get(dk)
        if i is not None:
            return i
        bd = [self.edge(keys[j], keys[(j + 1) % len(keys)]) for j in range(len(keys))]
        i = len(self.cells[1])
        self.cell_index[1][dk] = i
        self.cells[1].append(verts)
        self.bounds[1].append(bd)
        return i

    def top(self, k: int, verts, boundary, label):
        self.cells[k - 1].append(tuple(verts))
        self.bounds[k - 1].append(list(boundary))
        self.labels.append(label)

    def build(self, group, position, name) -> TilingInstance:
        verts = [position(k) for k in self.keys]
        return TilingInstance(group, verts, self.cells, self.bounds, self.labels, name)


def interval_tiling(count: int, lengths=(1,), labels=None, name: str = "interval") -> TilingInstance:
    """1D tiling by ``count`` intervals cycling through ``lengths``."""
    lengths = [as_exact(x) for x in lengths]
    labels = list(labels) if labels else [f"I{i}" for i in range(len(lengths))]
    g = Group.euclidean(1)
    pos = [Fraction(0)]
    for i in range(count):
        pos.append(pos[-1] + lengths[i % len(lengths)])
    verts = [g.element([p]) for p in pos]
    edges = [(i, i + 1) for i in range(count)]
    bds = [[(i + 1, 1), (i, -1)] for i in range(count)]
    lab = [labels[i % len(lengths)] for i in range(count)]
    return TilingInstance(g, verts, [edges], [bds], lab, name)


def _affine_position(group, basis, origin=(0, 0)):
    basis = [[as_exact(c) for c in b] for b in basis]
    origin = [as_exact(c) for c in origin]

    def position(key):
        i, j = key
        return group.element([origin[d] + i * basis[0][d] + j * basis[1][d] for d in range(2)])
    return position


def square_tiling(nx: int, ny: int, triangulated: bool = True, basis=((1, 0), (0, 1)),
                  origin=(0, 0), name: str | None = None) -> TilingInstance:
    """Unit square grid on [0,nx] x [0,ny], optionally split along the
    (0,0)-(1,1) diagonal.  ``basis`` maps the lattice linearly into R^2."""
    b = _Builder(2)
    for j in range(ny):
        for i in range(nx):
            p00, p10, p11, p01 = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
            if triangulated:
                for keys, label in (((p00, p10, p11), "lower"), ((p00, p11, p01), "upper")):
                    bd = [b.edge(keys[m], keys[(m + 1) % 3]) for m in range(3)]
                    b.top(2, [b.vertex(k) for k in keys], bd, label)
            else:
                keys = (p00, p10, p11, p01)
                bd = [b.edge(keys[m], keys[(m + 1) % 4]) for m in range(4)]
                b.top(2, [b.vertex(k) for k in keys], bd, "square")
    g = Group.euclidean(2)
    nm = name or ("square-triangulated" if triangulated else "square")
    return b.build(g, _affine_position(g, basis, origin), nm)


def strip_tiling(ncols: int, nrows: int, widths=(1, "sqrt2"), labels=("A", "B"),
                 name: str = "strip") -> TilingInstance:
    """Columns of unit-height rectangles whose widths cycle through ``widths``."""
    widths = [as_exact(w) for w in widths]
    xs = [Fraction(0)]
    for i in range(ncols):
        xs.append(xs[-1] + widths[i % len(widths)])
    b = _Builder(2)
    for j in range(nrows):
        for i in range(ncols):
            keys = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
            bd = [b.edge(keys[m], keys[(m + 1) % 4]) for m in range(4)]
            b.top(2, [b.vertex(k) for k in keys], bd, labels[i % len(widths)])
    g = Group.euclidean(2)
    return b.build(g, lambda key: g.element([xs[key[0]], key[1]]), name)


def _heis_word(a, b, c):
    """Polarized lattice point (a, b, c) as exponents: x^a y^b z^(c - ab)."""
    return a, b, c - a * b


def heisenberg_cube_tiling(nx: int, ny: int, nz: int, generators=None,
                           origin=None, name: str = "heisenberg-cubes") -> TilingInstance:
    """Tiling of the Heisenberg group by translates of one combinatorial 3-cell.

    Lattice points are integer polarized triples in a box of size nx x ny x nz
    centred at the identity.  Each 3-cell at lambda has
    nine vertices and six faces: a pentagon with boundary word
    x y z^-1 x^-1 y^-1 at lambda and at lambda z, and the squares
    y z y^-1 z^-1 (at lambda and lambda x) and x z x^-1 z^-1 (at lambda and
    lambda y).  ``generators`` optionally sends x, y, z to other group
    elements X, Y, Z with [X, Y] = Z central, giving a deformed copy.
    """
    H = Group.heisenberg(POLARIZED)
    if generators is None:
        gens = [H.element([1, 0, 0]), H.element([0, 1, 0]), H.element([0, 0, 1])]
    else:
        gens = [g if isinstance(g, GroupElement) else H.element(g) for g in generators]
        X, Y, Z = gens
        comm = X * Y * X.inverse() * Y.inverse()
        if comm != Z or X * Z != Z * X or Y * Z != Z * Y:
            raise TilingError("generator images must satisfy [X, Y] = Z with Z central")
    org = origin if origin is not None else H.identity()

    def mul(p, q):
        a, b, c = p
        a2, b2, c2 = q
        return (a + a2, b + b2, c + a * b2 + c2)

    X, Y, Z = (1, 0, 0), (0, 1, 0), (0, 0, 1)
    bld = _Builder(3)

    def pentagon(lam):
        keys = (lam, mul(lam, X), mul(lam, (1, 1, 1)), mul(lam, (1, 1, 0)), mul(lam, Y))
        return bld.polygon(keys, ("P", lam))

    def square(lam, g):
        keys = (lam, mul(lam, g), mul(mul(lam, g), Z), mul(lam, Z))
        return bld.polygon(keys, ("YZ" if g == Y else "XZ", lam))

    # boxes are centred so that the shear z -> z + x y' stays small in the middle
    for c in range(-(nz // 2), nz - nz // 2):
        for b in range(-(ny // 2), ny - ny // 2):
            for a in range(-(nx // 2), nx - nx // 2):
                lam = (a, b, c)
                faces = [
                    (pentagon(lam), -1), (pentagon(mul(lam, Z)), 1),
                    (square(lam, Y), -1), (square(mul(lam, X), Y), 1),
                    (square(lam, X), 1), (square(mul(lam, Y), X), -1),
                ]
                verts = set()
                for f, _ in faces:
                    verts.update(bld.cells[1][f])
                bld.top(3, sorted(verts, key=lambda v: bld.keys[v]), faces, "D")

    def position(key):
        ea, eb, ec = _heis_word(*key)
        return org * (gens[0] ** ea) * (gens[1] ** eb) * (gens[2] ** ec)

    return bld.build(H, position, name)


# ---------------------------------------------------------------------------
# Euclidean geometry of tiles
# ---------------------------------------------------------------------------


def _tile_polygon(t: TilingInstance, tile: int):
    """Exact vertex list of a 1D interval or a 2D polygon in boundary order."""
    if t.dim == 1:
        a, b = t.cell_vertices[1][tile]
        return [t.vertices[a].coords, t.vertices[b].coords]
    if t.dim == 2:
        return [t.vertices[v].coords for v in t.cell_vertices[2][tile]]
    raise TilingError("Euclidean tile geometry is available in dimensions 1 and 2 only")


def _sq_dist_point_segment(p, a, b):
    d = [bb - aa for aa, bb in zip(a, b)]
    w = [pp - aa for aa, pp in zip(a, p)]
    dd = sum((x * x for x in d), Fraction(0))
    s = sum((x * y for x, y in zip(w, d)), Fraction(0))
    if exact_sign(s) <= 0:
        q = a
    elif exact_sign(s - dd) >= 0:
        q = b
    else:
        lam = s / dd
        q = [aa + lam * x for aa, x in zip(a, d)]
    return sum(((pp - qq) * (pp - qq) for pp, qq in zip(p, q)), Fraction(0))


def _point_in_convex(p, poly) -> bool:
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if exact_sign(cross) < 0:
            return False
    return True


def sq_dist_to_tile(t: TilingInstance, tile: int, point) -> Fraction:
    """Exact squared Euclidean distance from a point to a (convex) tile."""
    p = [as_exact(c) for c in point]
    poly = _tile_polygon(t, tile)
    if t.dim == 1:
        lo, hi = min(poly[0][0], poly[1][0]), max(poly[0][0], poly[1][0])
        if exact_sign(p[0] - lo) >= 0 and exact_sign(hi - p[0]) >= 0:
            return Fraction(0)
        d = lo - p[0] if exact_sign(lo - p[0]) > 0 else p[0] - hi
        return d * d
    if _point_in_convex(p, poly):
        return Fraction(0)
    return min(_sq_dist_point_segment(p, poly[i], poly[(i + 1) % len(poly)])
               for i in range(len(poly)))


def tiles_containing(t: TilingInstance, point) -> list:
    coords = point.coords if isinstance(point, GroupElement) else point
    return [i for i in t.tiles if sq_dist_to_tile(t, i, coords) == 0]


def patch(t: TilingInstance, center, radius=0) -> list:
    """Tiles meeting the closed ball of ``radius`` about ``center`` (Euclidean)."""
    if not t.group.is_abelian:
        raise TilingError("patches by balls are implemented for Euclidean fragments")
    c = center.coords if isinstance(center, GroupElement) else [as_exact(x) for x in center]
    r2 = as_exact(radius) ** 2
    return [i for i in t.tiles if exact_sign(sq_dist_to_tile(t, i, c) - r2) <= 0]


# ---------------------------------------------------------------------------
# collared prototiles and Gahler complexes
# ---------------------------------------------------------------------------


def collared_prototiles(t: TilingInstance, n: int):
    """Translation classes of n-coronae of the saturated tiles.

    Returns ``(keys, tile_class)`` where ``tile_class`` maps each saturated
    tile to the index of its class in ``keys``.
    """
    keys: list = []
    index: dict = {}
    tile_class = {}
    for tile in t.tiles:
        if not t.is_saturated(tile, n):
            continue
        k = t.collared_key(tile, n)
        c = index.get(k)
        if c is None:
            c = len(keys)
            index[k] = c
            keys.append(k)
        tile_class[tile] = c
    if not tile_class:
        raise TruncationError(f"no tile of the fragment has a complete {n}-corona")
    return keys, tile_class


class GahlerProjection:
    """Cellular map from the fragment's cells onto the Gahler complex."""

    def __init__(self, level, maps, tile_class, class_keys):
        self.level = level
        self.maps = maps  # maps[k][fragment cell] = (gahler cell, sign)
        self.tile_class = tile_class
        self.class_keys = class_keys

    def __call__(self, k: int, cell: int):
        return self.maps[k].get(cell)

    def fibers(self, k: int) -> dict:
        out = defaultdict(list)
        for c, (g, _) in sorted(self.maps[k].items()):
            out[g].append(c)
        return dict(out)


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def gahler_complex(t: TilingInstance, n: int = 1):
    """Quotient of the saturated tiles by translation classes of n-coronae.

    Two fragment cells are identified when they occupy the same position in
    tiles of the same collared class; a cell shared by several saturated
    tiles glues the corresponding positions together.
    """
    keys, tile_class = collared_prototiles(t, n)
    uf = _UnionFind()
    cell_tags = [defaultdict(list) for _ in range(t.dim + 1)]
    for tile, cls in tile_class.items():
        a = t.anchor(tile)
        for k, faces in enumerate(t.tile_faces(tile)):
            for f in faces:
                tag = (cls, t.cell_shape(a, k, f))
                uf.find(tag)
                cell_tags[k][f].append(tag)
    for k in range(t.dim + 1):
        for f, tags in cell_tags[k].items():
            for tag in tags[1:]:
                uf.union(tags[0], tag)
    maps = [dict() for _ in range(t.dim + 1)]
    root_ids = [dict() for _ in range(t.dim + 1)]
    preimage = [[] for _ in range(t.dim + 1)]
    for k in range(t.dim + 1):
        for f in sorted(cell_tags[k]):
            root = uf.find(cell_tags[k][f][0])
            gid = root_ids[k].get(root)
            if gid is None:
                gid = len(preimage[k])
                root_ids[k][root] = gid
                preimage[k].append(f)
            maps[k][f] = (gid, 1)
    cells = [[[] for _ in preimage[0]]]
    for k in range(1, t.dim + 1):
        level = []
        for gid, f in enumerate(preimage[k]):
            level.append([(maps[k - 1][face][0], s) for face, s in t.cell_boundaries[k][f]])
        cells.append(level)
    # pi commutes with boundary: every preimage gives the same signed boundary list
    for k in range(1, t.dim + 1):
        for f, (gid, sign) in maps[k].items():
            mine = [(maps[k - 1][face][0], s * sign) for face, s in t.cell_boundaries[k][f]]
            if mine != cells[k][gid]:
                raise TilingError(f"projection does not commute with the boundary at cell {k}:{f}")
    labels = []
    for gid, f in enumerate(preimage[t.dim]):
        labels.append(f"{t.labels[f]}#{tile_class[f]}")
    cx = CellComplex(cells, labels)
    # every codimension-1 cell is a face of two tile positions once the gluing is complete
    uses = defaultdict(int)
    for bd in cells[t.dim]:
        for face, _ in bd:
            uses[face] += 1
    lonely = [f for f in range(len(cells[t.dim - 1])) if uses[f] < 2]
    if lonely:
        raise TruncationError(f"{len(lonely)} faces of the quotient are unglued; "
                              "the fragment is too small to determine the gluing")
    if not cx.boundary_squares_vanish():
        raise TilingError("quotient complex has nonzero boundary of boundary")
    return cx, GahlerProjection(n, maps, tile_class, keys)


def forgetful_chain_maps(t: TilingInstance, n: int):
    """Chain maps of the forgetful map Gamma_n -> Gamma_{n-1}.

    Returns (source complex, target complex, matrices) with matrices[k] of
    shape (target k-cells) x (source k-cells).
    """
    if n < 1:
        raise ValueError("level must be at least 1")
    src, ps = gahler_complex(t, n)
    dst, pd = gahler_complex(t, n - 1)
    mats = []
    for k in range(t.dim + 1):
        m = [[0] * src.counts[k] for _ in range(dst.counts[k])]
        seen = {}
        for f, (g, s) in ps.maps[k].items():
            g2, s2 = pd.maps[k][f]
            entry = (g2, s * s2)
            if seen.setdefault(g, entry) != entry:
                raise TilingError("forgetful map is not well defined on cells")
        for g, (g2, s) in seen.items():
            m[g2][g] = s
        mats.append(m)
    return src, dst, mats


# ---------------------------------------------------------------------------
# tiling distance (Euclidean fragments)
# ---------------------------------------------------------------------------


def _tile_signature(t, tile, shift=None):
    poly = _tile_polygon(t, tile)
    if shift is not None:
        poly = [tuple(c + s for c, s in zip(p, shift)) for p in poly]
    return (t.labels[tile], tuple(sorted(tuple(p) for p in poly)))


def _segments(t, tiles_, facets_only=None):
    """Float boundary segments of the given tiles, as an (m, 2, dim) array."""
    segs = []
    for tile in tiles_:
        poly = [[float(c) for c in p] for p in _tile_polygon(t, tile)]
        if t.dim == 1:
            segs.append([poly[0], poly[1]])
        else:
            for i in range(len(poly)):
                segs.append([poly[i], poly[(i + 1) % len(poly)]])
    return np.array(segs, dtype=float).reshape(-1, 2, t.dim)


def _dist_points_to_tiles(points, t, tiles_, shift):
    """Float distances from each point to the union of the given tiles."""
    if not tiles_:
        return np.full(len(points), np.inf)
    out = np.full(len(points), np.inf)
    sh = np.array([float(s) for s in shift])
    for tile in tiles_:
        poly = np.array([[float(c) for c in p] for p in _tile_polygon(t, tile)]) + sh
        if t.dim == 1:
            lo, hi = poly[:, 0].min(), poly[:, 0].max()
            x = points[:, 0]
            d = np.maximum(np.maximum(lo - x, x - hi), 0.0)
        else:
            d = _dist_points_polygon(points, poly)
        out = np.minimum(out, d)
    return out


def _dist_points_polygon(points, poly):
    n = len(poly)
    inside = np.ones(len(points), dtype=bool)
    best = np.full(len(points), np.inf)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        e = b - a
        w = points - a
        cross = e[0] * w[:, 1] - e[1] * w[:, 0]
        inside &= cross >= 0
        lam = np.clip((w @ e) / (e @ e), 0.0, 1.0)
        q = a + lam[:, None] * e
        best = np.minimum(best, np.linalg.norm(points - q, axis=1))
    best[inside] = 0.0
    return best


def _boundary_facet_tiles(t):
    d = t.dim
    owners = defaultdict(list)
    for tile in t.tiles:
        for f, _ in t.cell_boundaries[d][tile]:
            owners[f].append(tile)
    return [f for f, o in owners.items() if len(o) == 1]


def _dist_points_to_facets(points, t, facets, shift):
    if not facets:
        return np.full(len(points), np.inf)
    sh = np.array([float(s) for s in shift])
    if t.dim == 1:
        xs = np.array([float(t.vertices[f].coords[0]) for f in facets]) + sh[0]
        return np.abs(points[:, :1] - xs[None, :]).min(axis=1)
    out = np.full(len(points), np.inf)
    for f in facets:
        a_i, b_i = t.cell_vertices[1][f]
        a = np.array([float(c) for c in t.vertices[a_i].coords]) + sh
        b = np.array([float(c) for c in t.vertices[b_i].coords]) + sh
        e = b - a
        w = points - a
        lam = np.clip((w @ e) / (e @ e), 0.0, 1.0)
        out = np.minimum(out, np.linalg.norm(points - (a + lam[:, None] * e), axis=1))
    return out


def _inside_union(points, t, shift):
    return _dist_points_to_tiles(points, t, list(t.tiles), shift) == 0.0


def tiling_distance(t1: TilingInstance, t2: TilingInstance, offset_radius=1, pitch=Fraction(1, 8)):
    """Certified bracket on the tiling metric between two Euclidean fragments.

    The agreement radius is the supremum, over small left translations g, g'
    with |g|, |g'| < 1/(2r), of the radii r at which the patches of g.t1 and
    g'.t2 around the origin coincide.  Candidate relative translations come
    from pairs of congruent tiles; the offset of the basepoint is searched on
    a grid over the box of half-width ``offset_radius`` with a Lipschitz bound
    between grid points.  Agreement is only certified inside both fragments,
    so finite coverage lowers the lower bound on the radius.

    Returns a dict with ``lower``/``upper`` bounds on the distance and the
    corresponding radius bracket.
    """
    if not (t1.group.is_abelian and t2.group.is_abelian) or t1.dim != t2.dim:
        raise TilingError("tiling distance is implemented for Euclidean fragments of equal dimension")
    if t1.dim not in (1, 2):
        raise TilingError("tiling distance supports dimensions 1 and 2")
    dim = t1.dim
    cmax = float(offset_radius)
    step = float(pitch)
    axis = np.arange(-cmax, cmax + step / 2, step)
    if dim == 1:
        grid = axis[:, None]
    else:
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
    half_diag = step / 2 * math.sqrt(dim)
    # candidate relative translations h with t2 ~ h + t1 near the origin
    sig2 = defaultdict(list)
    for tile in t2.tiles:
        sig2[t2.labels[tile]].append(tile)
    near2 = [tile for tile in t2.tiles
             if float(sq_dist_to_tile(t2, tile, [0] * dim)) ** 0.5 <= 2 * cmax + 1e-12]
    candidates = set()
    for tb in near2:
        pb = _tile_polygon(t2, tb)
        sb = sorted(tuple(p) for p in pb)
        for ta in t1.tiles:
            if t1.labels[ta] != t2.labels[tb]:
                continue
            pa = sorted(tuple(p) for p in _tile_polygon(t1, ta))
            if len(pa) != len(sb):
                continue
            h = tuple(b - a for a, b in zip(pa[0], sb[0]))
            if all(tuple(x + y for x, y in zip(p, h)) == q for p, q in zip(pa, sb)):
                if sum(float(x) ** 2 for x in h) ** 0.5 <= 4 * cmax + 1e-12:
                    candidates.add(h)
    set1 = {_tile_signature(t1, tile) for tile in t1.tiles}
    set2 = {_tile_signature(t2, tile) for tile in t2.tiles}
    bd1 = _boundary_facet_tiles(t1)
    bd2 = _boundary_facet_tiles(t2)
    best_low, best_up = 0.0, 0.0
    witness = None
    norm_c = np.linalg.norm(grid, axis=1)
    for h in sorted(candidates):
        hf = np.array([float(x) for x in h])
        shifted = {(lab, tuple(sorted(tuple(c + s for c, s in zip(p, h)) for p in poly)))
                   for lab, poly in set1}
        only1 = [tile for tile in t1.tiles
                 if (t1.labels[tile], tuple(sorted(tuple(c + s for c, s in zip(p, h))
                                                   for p in _tile_polygon(t1, tile)))) not in set2]
        only2 = [tile for tile in t2.tiles if _tile_signature(t2, tile) not in shifted]
        rho_diff = np.minimum(_dist_points_to_tiles(grid, t1, only1, h),
                              _dist_points_to_tiles(grid, t2, only2, [0] * dim))
        inside = _inside_union(grid, t2, [0] * dim) & _inside_union(grid, t1, h)
        cover = np.minimum(_dist_points_to_facets(grid, t1, bd1, h),
                           _dist_points_to_facets(grid, t2, bd2, [0] * dim))
        cover = np.where(inside, cover, 0.0)
        rho_low = np.minimum(rho_diff, cover)
        norm_hc = np.linalg.norm(grid - hf, axis=1)
        with np.errstate(divide="ignore"):
            lim_c = np.where(norm_c > 0, 1.0 / (2 * norm_c), np.inf)
            lim_hc = np.where(norm_hc > 0, 1.0 / (2 * norm_hc), np.inf)
            f_low = np.minimum(rho_low, np.minimum(lim_c, lim_hc))
            # upper envelope over each grid cell
            lc = np.maximum(norm_c - half_diag, 0.0)
            lhc = np.maximum(norm_hc - half_diag, 0.0)
            up_c = np.where(lc > 0, 1.0 / (2 * lc), np.inf)
            up_hc = np.where(lhc > 0, 1.0 / (2 * lhc), np.inf)
            f_up = np.minimum(rho_diff + half_diag, np.minimum(up_c, up_hc))
        i = int(np.argmax(f_low))
        if f_low[i] > best_low:
            best_low = float(f_low[i])
            witness = {"h": [str(x) for x in h], "offset": grid[i].tolist()}
        best_up = max(best_up, float(np.max(f_up)))
    complete = best_low > 0 and 1.0 / (2 * best_low) <= cmax
    if not complete:
        best_up = math.inf
    lower = 0.0 if best_up == math.inf else min(1.0, 1.0 / best_up)
    upper = 1.0 if best_low == 0 else min(1.0, 1.0 / best_low)
    return {"lower": lower, "upper": upper, "radius_lower": best_low,
            "radius_upper": best_up, "search_complete": complete, "witness": witness}
