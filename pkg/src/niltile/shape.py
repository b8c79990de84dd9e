"""Shape cocycles on Gahler complexes: extraction, rationalization, deformation.

A shape function assigns a group element to every oriented edge of the
level-1 Gahler complex; the reversed edge gets the inverse.  The shape of a
tiling sends an edge from x to y to the displacement x^-1 y.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .complex import CellComplex, GahlerProjection, TilingError, TilingInstance, gahler_complex
from .nilgroup import CANONICAL, Group, GroupElement, proxy_distance, proxy_distance_below
from .scalar import as_exact, exact_sign, rational_approximation


class ShapeError(ValueError):
    pass


class ShapeFunction:
    """Group-valued function on the oriented edges of a complex."""

    def __init__(self, group: Group, values):
        self.group = group
        self.values = list(values)

    def __call__(self, edge: int, sign: int = 1) -> GroupElement:
        v = self.values[edge]
        return v if sign > 0 else v.inverse()

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return isinstance(other, ShapeFunction) and self.values == other.values

    def is_rational(self) -> bool:
        return all(v.is_rational() for v in self.values)

    def to_json(self):
        return {"group": self.group.to_json(),
                "edges": [[i, v.to_json()] for i, v in enumerate(self.values)]}

    @classmethod
    def from_json(cls, data):
        conv = None
        if data["edges"]:
            conv = data["edges"][0][1].get("convention")
        group = Group.from_json(data["group"], conv)
        vals = [None] * len(data["edges"])
        for i, v in data["edges"]:
            vals[int(i)] = GroupElement.from_json(group, v)
        return cls(group, vals)


def _resolve_gamma(t, gamma):
    if gamma is None:
        return gahler_complex(t, 1)
    return gamma


def path_evaluate(s: ShapeFunction, path) -> GroupElement:
    """Product of shape values along a sequence of (edge, sign) pairs."""
    out = s.group.identity()
    for edge, sign in path:
        out = out * s(edge, sign)
    return out


def extract_shape(t: TilingInstance, gamma=None) -> ShapeFunction:
    """Displacement cocycle of a fragment, checked on every preimage edge."""
    cx, proj = _resolve_gamma(t, gamma)
    values = [None] * cx.counts[1]
    for f, (g, sign) in sorted(proj.maps[1].items()):
        tail, head = t.cell_vertices[1][f]
        d = t.vertices[tail].inverse() * t.vertices[head]
        if sign < 0:
            d = d.inverse()
        if values[g] is None:
            values[g] = d
        elif values[g] != d:
            raise ShapeError(f"edge {g} of the complex has preimages with different displacements")
    if any(v is None for v in values):
        raise ShapeError("some edge of the complex has no preimage")
    return ShapeFunction(t.group, values)


def verify_cocycle(s: ShapeFunction, cx: CellComplex):
    """(True, None) if every 2-cell boundary word evaluates to e, else (False, cell)."""
    if cx.dim < 2:
        return True, None
    for c in range(cx.counts[2]):
        if not path_evaluate(s, cx.boundary_word(c)).is_identity():
            return False, c
    return True, None


# ---------------------------------------------------------------------------
# spanning trees and rationalization
# ---------------------------------------------------------------------------


@dataclass
class SpanningTreeData:
    tree_edges: set
    root: int
    parent: dict  # vertex -> (edge, sign) stepping from parent to vertex
    fundamental_cycles: dict  # non-tree edge -> path (edge, sign) through the root
    decompositions: dict  # 2-cell -> non-tree letters of its word, in order

    def path_from_root(self, v: int) -> list:
        out = []
        while v != self.root:
            e, s, p = self.parent[v]
            out.append((e, s))
            v = p
        return out[::-1]


def spanning_tree(cx: CellComplex) -> SpanningTreeData:
    """Breadth-first tree from the lowest vertex, scanning edges by index."""
    adj = {v: [] for v in range(cx.counts[0])}
    for e in range(cx.counts[1]):
        tail, head = cx.edge_ends(e)
        adj[tail].append((e, 1, head))
        adj[head].append((e, -1, tail))
    for v in adj:
        adj[v].sort()
    root = 0
    parent = {}
    seen = {root}
    tree = set()
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for e, sign, w in adj[v]:
            if w not in seen:
                seen.add(w)
                parent[w] = (e, sign, v)
                tree.add(e)
                queue.append(w)
    if len(seen) != cx.counts[0]:
        raise ShapeError("the 1-skeleton is disconnected")
    data = SpanningTreeData(tree, root, parent, {}, {})
    for e in range(cx.counts[1]):
        if e in tree:
            continue
        tail, head = cx.edge_ends(e)
        back = [(f, -s) for f, s in reversed(data.path_from_root(head))]
        data.fundamental_cycles[e] = data.path_from_root(tail) + [(e, 1)] + back
    if cx.dim >= 2:
        for c in range(cx.counts[2]):
            data.decompositions[c] = [(e, s) for e, s in cx.boundary_word(c) if e not in tree]
    return data


def approximate_element(g: GroupElement, tol) -> GroupElement:
    """Coordinatewise continued-fraction approximation in canonical coordinates."""
    if g.is_rational():
        return g
    c = [rational_approximation(x, tol) for x in g.canonical_coords]
    return GroupElement(g.group, c, CANONICAL).to_convention(g.convention)


def _solve_forced(word, edge, values, group):
    """Value of ``edge`` making the word evaluate to e, or None if the word
    does not determine it (total exponent zero)."""
    positions = [i for i, (e, _) in enumerate(word) if e == edge]
    total = sum(word[i][1] for i in positions)
    if total == 0:
        return None
    ident = group.identity()

    def value(u):
        out = ident
        for e, s in word:
            g = u if e == edge else values[e]
            out = out * (g if s > 0 else g.inverse())
        return out

    if len(positions) == 1:
        i = positions[0]
        before = ident
        for e, s in word[:i]:
            before = before * (values[e] if s > 0 else values[e].inverse())
        after = ident
        for e, s in word[i + 1:]:
            after = after * (values[e] if s > 0 else values[e].inverse())
        g = before.inverse() * after.inverse()
        return g if word[i][1] > 0 else g.inverse()
    if not group.sc.is_triangular:
        return None
    # coordinate k of the word depends linearly on u_k (slope = total exponent)
    # and not on later coordinates, so solve top-down
    u = [Fraction(0)] * group.dim
    for k in range(group.dim):
        u0 = list(u)
        u0[k] = Fraction(0)
        f0 = value(GroupElement(group, u0, CANONICAL)).canonical_coords[k]
        u1 = list(u)
        u1[k] = Fraction(1)
        f1 = value(GroupElement(group, u1, CANONICAL)).canonical_coords[k]
        slope = f1 - f0
        if slope == 0:
            return None
        u[k] = -f0 / slope
    g = GroupElement(group, u, CANONICAL).to_convention(group.default_convention)
    return g if value(g).is_identity() else None


@dataclass
class RationalizationReport:
    steps: list = field(default_factory=list)
    tolerance: Fraction = Fraction(0)
    attempts: int = 0
    max_distance: float = 0.0
    cocycle: bool = False
    rational: bool = False
    within_rho: bool = False

    def to_json(self):
        return {
            "steps": [list(map(str, s)) for s in self.steps],
            "tolerance": str(self.tolerance),
            "attempts": self.attempts,
            "max_distance": self.max_distance,
            "cocycle": self.cocycle,
            "rational": self.rational,
            "within_rho": self.within_rho,
        }


def _rationalize_once(s, cx, tree, tol):
    group = s.group
    values = {}
    steps = []
    for e in sorted(tree.tree_edges):
        values[e] = approximate_element(s.values[e], tol)
        steps.append(("tree", e))
    nontree = [e for e in range(cx.counts[1]) if e not in tree.tree_edges]
    words = {c: cx.boundary_word(c) for c in tree.decompositions}
    while len(values) < cx.counts[1]:
        remaining = {c: sorted({e for e, _ in tree.decompositions[c]} - values.keys())
                     for c in tree.decompositions}
        active = {c: r for c, r in remaining.items() if r}
        if not active:
            # M = infinity: the remaining edges bound nothing
            for e in nontree:
                if e not in values:
                    values[e] = approximate_element(s.values[e], tol)
                    steps.append(("free-unbounded", e))
            break
        m = min(len(r) for r in active.values())
        blocked = set()
        if m == 1:
            solved = False
            for c in sorted(active):
                if len(active[c]) != 1:
                    continue
                e = active[c][0]
                g = _solve_forced(words[c], e, values, group)
                if g is not None:
                    values[e] = g
                    steps.append(("forced", e, c))
                    solved = True
                    break
                blocked.add(e)
            if solved:
                continue

        def forcible(e):
            for c, r in active.items():
                if e in r:
                    if sum(sg for f, sg in words[c] if f == e) != 0:
                        return True
            return False

        pick = None
        order = sorted(active, key=lambda c: (len(active[c]) != m, c)) if m > 1 else sorted(active)
        for c in order:
            cands = [e for e in active[c] if e not in blocked]
            if not cands:
                continue
            free = [e for e in cands if not forcible(e)]
            pick = (free or cands)[0], c
            break
        if pick is None:
            e = min(blocked)
            pick = (e, None)
        e, c = pick
        values[e] = approximate_element(s.values[e], tol)
        steps.append(("free", e, c))
    return ShapeFunction(group, [values[e] for e in range(cx.counts[1])]), steps


def rationalize(s: ShapeFunction, cx: CellComplex, rho, max_attempts: int = 8):
    """Rational cocycle within proxy distance ``rho`` of ``s`` on every edge.

    Tree edges are approximated freely; then 2-cells are processed by how
    many of their non-tree edges are still open.  A cell with one open edge
    forces that edge exactly; otherwise the lowest-index cell with the fewest
    open edges contributes one freely approximated edge (preferring edges no
    open cell can force).  Tolerance shrinks by 100 per failed attempt.
    """
    rho = as_exact(rho)
    if exact_sign(rho) <= 0:
        raise ShapeError("rho must be positive")
    ok, bad = verify_cocycle(s, cx)
    if not ok:
        raise ShapeError(f"input is not a cocycle (2-cell {bad})")
    tree = spanning_tree(cx)
    wmax = max(s.group.sc.weights)
    # start at the widest tolerance the proxy norm allows; forced edges that
    # overshoot trigger a retry with a tighter one
    tol = Fraction(min(rho, rho ** wmax))
    report = RationalizationReport()
    for attempt in range(1, max_attempts + 1):
        sq, steps = _rationalize_once(s, cx, tree, tol)
        report.steps = steps
        report.tolerance = tol
        report.attempts = attempt
        report.cocycle = verify_cocycle(sq, cx)[0]
        report.rational = sq.is_rational()
        report.within_rho = all(proxy_distance_below(a, b, rho) for a, b in zip(s.values, sq.values))
        report.max_distance = max((proxy_distance(a, b) for a, b in zip(s.values, sq.values)),
                                  default=0.0)
        if report.cocycle and report.rational and report.within_rho:
            return sq, report
        tol = tol / 100
    raise ShapeError(
        f"rationalization failed after {max_attempts} attempts: cocycle={report.cocycle}, "
        f"max distance {report.max_distance:.3g} vs rho {float(rho):.3g}")


# ---------------------------------------------------------------------------
# deformation
# ---------------------------------------------------------------------------


@dataclass
class DeformationResult:
    tiling: TilingInstance
    vertex_map: dict  # source vertex -> deformed vertex index
    tile_map: dict  # source tile -> deformed tile index
    prototile_maps: dict  # class -> list of (source relative coords, deformed relative coords)
    checks: dict


def tile_enumeration(t: TilingInstance, tiles, start_tile: int, mode: str = "bfs", seed: int = 0):
    """Order ``tiles`` so that each one shares a vertex with an earlier one."""
    tiles = set(tiles)
    rng = random.Random(seed)
    order = []
    seen = {start_tile}
    frontier = [start_tile]
    while frontier:
        if mode == "bfs":
            cur = frontier.pop(0)
        elif mode == "dfs":
            cur = frontier.pop()
        else:
            cur = frontier.pop(rng.randrange(len(frontier)))
        order.append(cur)
        nbrs = sorted({u for v in t.tile_vertices(cur) for u in t.vertex_tiles[v]
                       if u in tiles and u not in seen})
        if mode == "random":
            rng.shuffle(nbrs)
        for u in nbrs:
            seen.add(u)
            frontier.append(u)
    if len(order) != len(tiles):
        raise TilingError("tiles are not connected through shared vertices")
    return order


def _place(t, proj, sigma, order, base):
    pos = {base: t.vertices[base]}
    for tile in order:
        verts = t.tile_vertices(tile)
        edges = t.tile_faces(tile)[1] if t.dim >= 1 else []
        if not any(v in pos for v in verts):
            raise ShapeError("enumeration visits a tile disjoint from the placed region")
        changed = True
        while changed:
            changed = False
            for f in edges:
                tail, head = t.cell_vertices[1][f]
                g, sign = proj.maps[1][f]
                step = sigma(g, sign)
                if tail in pos and head not in pos:
                    pos[head] = pos[tail] * step
                    changed = True
                elif head in pos and tail not in pos:
                    pos[tail] = pos[head] * step.inverse()
                    changed = True
                elif tail in pos and head in pos:
                    if pos[tail] * step != pos[head]:
                        raise ShapeError("vertex placement depends on the path")
    return pos


def _signed_area(points):
    area = Fraction(0)
    n = len(points)
    for i in range(n):
        (x0, y0), (x1, y1) = points[i], points[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    return area


def deform(t: TilingInstance, sigma: ShapeFunction, rho, gamma=None, base_vertex: int | None = None,
           rho_max=None, paths: int = 100, seed: int = 0) -> DeformationResult:
    """Rebuild the saturated part of ``t`` with edge displacements given by ``sigma``.

    ``rho`` bounds the edgewise proxy distance between ``sigma`` and the
    tiling's own shape; ``rho_max`` (if given) is a certified stability
    threshold that ``rho`` must not exceed.
    """
    cx, proj = _resolve_gamma(t, gamma)
    rho = as_exact(rho)
    if rho_max is not None and exact_sign(rho - as_exact(rho_max)) > 0:
        raise ShapeError(f"rho {rho} exceeds the certified threshold {rho_max}")
    ok, bad = verify_cocycle(sigma, cx)
    if not ok:
        raise ShapeError(f"sigma is not a cocycle: 2-cell {bad} does not close")
    own = extract_shape(t, (cx, proj))
    far = [e for e in range(cx.counts[1]) if not proxy_distance_below(own.values[e], sigma.values[e], rho)]
    if far:
        raise ShapeError(f"sigma moves edges {far} by at least rho")
    tiles = sorted(proj.tile_class)
    if base_vertex is None:
        base_vertex = min((v for tile in tiles for v in t.tile_vertices(tile)),
                          key=lambda v: t.vertices[v].canonical_coords)
    start = next(tile for tile in tiles if base_vertex in t.tile_vertices(tile))
    placements = []
    for mode, sd in (("bfs", 0), ("dfs", 0), ("random", seed)):
        order = tile_enumeration(t, tiles, start, mode, sd)
        placements.append(_place(t, proj, sigma, order, base_vertex))
    pos = placements[0]
    same_sets = all(p == pos for p in placements[1:])
    # reindex the saturated sub-fragment
    vmap = {v: i for i, v in enumerate(sorted(pos))}
    keep = [set() for _ in range(t.dim + 1)]
    for tile in tiles:
        for k, faces in enumerate(t.tile_faces(tile)):
            keep[k].update(faces)
    cmaps = [vmap] + [{c: i for i, c in enumerate(sorted(keep[k]))} for k in range(1, t.dim + 1)]
    cell_vertices = []
    cell_boundaries = []
    for k in range(1, t.dim + 1):
        cell_vertices.append([tuple(vmap[v] for v in t.cell_vertices[k][c]) for c in sorted(keep[k])])
        cell_boundaries.append([[(cmaps[k - 1][f], s) for f, s in t.cell_boundaries[k][c]]
                                for c in sorted(keep[k])])
    new = TilingInstance(t.group, [pos[v] for v in sorted(pos)], cell_vertices, cell_boundaries,
                         [t.labels[c] for c in sorted(keep[t.dim])], name=f"{t.name}-deformed")
    checks = {"cocycle": True, "enumerations_agree": same_sets}
    # round trip: every realized edge displacement equals sigma
    rt = True
    for f in keep[1]:
        tail, head = t.cell_vertices[1][f]
        g, sign = proj.maps[1][f]
        if pos[tail].inverse() * pos[head] != sigma(g, sign):
            rt = False
            break
    checks["round_trip"] = rt
    checks["path_independence"] = _check_paths(t, proj, sigma, pos, keep[1], paths, seed)
    checks["combinatorics_preserved"] = new.counts == [len(keep[k]) for k in range(t.dim + 1)] \
        and new.check() == []
    if t.dim == 2 and t.group.is_abelian:
        checks["orientation_preserved"] = all(
            exact_sign(_signed_area([pos[v].coords for v in t.cell_vertices[2][c]]))
            == exact_sign(_signed_area([t.vertices[v].coords for v in t.cell_vertices[2][c]]))
            for c in keep[2])
    # per-class vertex maps and the anchored displacement bound
    proto = {}
    worst = 0.0
    for tile in tiles:
        cls = proj.tile_class[tile]
        a = t.anchor(tile)
        pairs = []
        for v in t.tile_vertices(tile):
            src = t.vertices[a].inverse() * t.vertices[v]
            dst = pos[a].inverse() * pos[v]
            pairs.append((src.canonical_coords, dst.canonical_coords))
            worst = max(worst, proxy_distance(src, dst))
        pairs.sort()
        if cls in proto and proto[cls] != pairs:
            checks["prototile_maps_consistent"] = False
        proto.setdefault(cls, pairs)
    checks.setdefault("prototile_maps_consistent", True)
    checks["max_anchored_displacement"] = worst
    failed = [k for k, v in checks.items() if v is False]
    if failed:
        raise ShapeError(f"deformation checks failed: {failed}")
    tile_map = {tile: cmaps[t.dim][tile] for tile in tiles}
    return DeformationResult(new, {v: vmap[v] for v in pos}, tile_map, proto, checks)


def _check_paths(t, proj, sigma, pos, edges, count, seed):
    rng = random.Random(seed)
    adj = {}
    for f in edges:
        tail, head = t.cell_vertices[1][f]
        g, sign = proj.maps[1][f]
        adj.setdefault(tail, []).append((head, (g, sign)))
        adj.setdefault(head, []).append((tail, (g, -sign)))
    verts = sorted(adj)
    if len(verts) < 2:
        return True
    for _ in range(count):
        u, v = rng.sample(verts, 2)
        for _ in range(2):
            path = _random_path(adj, u, v, rng)
            if pos[u] * path_evaluate(sigma, path) != pos[v]:
                return False
    return True


def _random_path(adj, u, v, rng):
    """Breadth-first path with shuffled neighbour order."""
    prev = {u: None}
    queue = deque([u])
    while queue:
        w = queue.popleft()
        if w == v:
            break
        nbrs = list(adj[w])
        rng.shuffle(nbrs)
        for x, letter in nbrs:
            if x not in prev:
                prev[x] = (w, letter)
                queue.append(x)
    path = []
    w = v
    while prev[w] is not None:
        w, letter = prev[w][0], prev[w][1]
        path.append(letter)
    return path[::-1]
