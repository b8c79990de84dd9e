"""Delaunay sets and complexes with exact empty-ball and protection checks.

Points are kept exactly.  Rational point sets are rescaled to integers so
that the in-sphere and orientation predicates run on Python ints; sets with
irrational (Q(sqrt2)) coordinates use the same predicates on exact scalars.
scipy's Qhull supplies candidate triangulations, which are then verified
exactly; a brute-force enumeration is the fallback.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial import Delaunay as _QhullDelaunay
from scipy.spatial import cKDTree

from . import _linalg
from .complex import CellComplex
from .nilgroup import GroupElement
from .scalar import as_exact, exact_sign, format_scalar, is_rational, parse_scalar


class DelaunayError(ValueError):
    pass


class DegenerateInputError(DelaunayError):
    pass


class NotDelaunayError(DelaunayError):
    pass


class GenericityError(DelaunayError):
    pass


class MeshError(DelaunayError):
    pass


class ResourceCapError(RuntimeError):
    pass


@dataclass(frozen=True)
class MeshParams:
    """Net constants: (mu*eps)-discrete, eps-dense, delta-protected, rho-perturbed."""
    mu: Fraction = Fraction(1)
    eps: Fraction = Fraction(1)
    delta: Fraction = Fraction(0)
    rho: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("mu", "eps", "delta", "rho"):
            object.__setattr__(self, name, as_exact(getattr(self, name)))
        if self.mu <= 0 or self.eps <= 0:
            raise MeshError("mu and eps must be positive")
        if self.delta < 0 or self.rho < 0:
            raise MeshError("delta and rho must be nonnegative")

    def check_perturbation(self):
        if self.rho > self.mu * self.eps / 4:
            raise MeshError(f"rho {self.rho} exceeds mu*eps/4 = {self.mu * self.eps / 4}")


# ---------------------------------------------------------------------------
# point sets
# ---------------------------------------------------------------------------


class PointSet:
    """Finite set of distinct points in a chart of dimension 2 or 3."""

    def __init__(self, points, chart: str = "identity", region=None):
        pts = [tuple(c if type(c) in (int, Fraction) else as_exact(c) for c in p) for p in points]
        if not pts:
            raise DelaunayError("empty point set")
        self.dim = len(pts[0])
        if any(len(p) != self.dim for p in pts):
            raise DelaunayError("points have mixed dimensions")
        if len(set(pts)) != len(pts):
            raise DelaunayError("points are not pairwise distinct")
        self.points = pts
        self.chart = chart
        self.region = region
        self.exact_integer = all(is_rational(c) for p in pts for c in p)
        if self.exact_integer:
            scale = math.lcm(*{c.denominator for p in pts for c in p})
            self.scale = scale
            self.coords = [tuple(c.numerator * (scale // c.denominator) for c in p) for p in pts]
        else:
            self.scale = 1
            self.coords = pts
        self.floats = np.array([[float(c) for c in p] for p in pts], dtype=float)
        self._kd = None

    def __len__(self):
        return len(self.points)

    @property
    def kd(self) -> cKDTree:
        if self._kd is None:
            self._kd = cKDTree(self.floats)
        return self._kd

    @classmethod
    def from_elements(cls, elements, basepoint: GroupElement | None = None):
        """Chart images of group elements: coordinates for abelian groups, the
        exponential chart at ``basepoint`` (canonical coordinates of
        basepoint^-1 g) otherwise."""
        elements = list(elements)
        group = elements[0].group
        if group.is_abelian and basepoint is None:
            return cls([g.coords for g in elements], "identity")
        base = basepoint.inverse() if basepoint is not None else group.identity()
        return cls([(base * g).canonical_coords for g in elements], "exp")

    def moved(self, index: int, point) -> "PointSet":
        point = tuple(as_exact(c) for c in point)
        pts = list(self.points)
        pts[index] = point
        if not (self.exact_integer and all(is_rational(c) and self.scale % Fraction(c).denominator == 0
                                           for c in point)):
            return PointSet(pts, self.chart, self.region)
        if point != self.points[index] and point in set(self.points):
            raise DelaunayError("points are not pairwise distinct")
        out = object.__new__(PointSet)
        out.__dict__.update(self.__dict__)
        out.points = pts
        out.coords = list(self.coords)
        out.coords[index] = tuple(int(Fraction(c) * self.scale) for c in point)
        out.floats = self.floats.copy()
        out.floats[index] = [float(c) for c in point]
        out._kd = None
        return out

    def to_json(self):
        return {"chart": self.chart, "dim": self.dim,
                "points": [[format_scalar(c) for c in p] for p in self.points]}

    @classmethod
    def from_json(cls, data):
        return cls([[parse_scalar(c) for c in p] for p in data["points"]], data.get("chart", "identity"))


# ---------------------------------------------------------------------------
# exact predicates
# ---------------------------------------------------------------------------


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n == 3:
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    total = 0
    for j in range(n):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _sign(x) -> int:
    if isinstance(x, int):
        return (x > 0) - (x < 0)
    return exact_sign(x)


def orientation(coords, simplex) -> int:
    p0 = coords[simplex[0]]
    rows = [[a - b for a, b in zip(coords[i], p0)] for i in simplex[1:]]
    return _sign(_det(rows))


def _lifted(coords, simplex, q):
    rows = []
    for i in simplex:
        d = [a - b for a, b in zip(coords[i], q)]
        rows.append(d + [sum(x * x for x in d)])
    return _sign(_det(rows))


def _calibrate(dim):
    simplex = list(range(dim + 1))
    pts = [tuple([0] * dim)] + [tuple(6 if j == i else 0 for j in range(dim)) for i in range(dim)]
    inside = tuple([1] * dim)
    return _lifted(pts, simplex, inside) * orientation(pts, simplex)


_INSIDE = {d: _calibrate(d) for d in (1, 2, 3)}


def insphere(coords, simplex, q) -> int:
    """+1 if q is strictly inside the circumsphere, 0 on it, -1 outside."""
    o = orientation(coords, simplex)
    if o == 0:
        raise DegenerateInputError(f"simplex {tuple(simplex)} is flat")
    dim = len(coords[simplex[0]])
    return _lifted(coords, simplex, q) * o * _INSIDE[dim]


def _circ_scaled(coords, simplex):
    """Circumcenter as p0 + N/D by Cramer's rule, with only ring operations.

    Returns (p0, N, D, R) where R = |N|^2, so the squared radius is R/D^2.
    """
    p0 = coords[simplex[0]]
    a = [[2 * (x - y) for x, y in zip(coords[i], p0)] for i in simplex[1:]]
    b = [sum((x - y) * (x - y) for x, y in zip(coords[i], p0)) for i in simplex[1:]]
    D = _det(a)
    if _sign(D) == 0:
        raise DegenerateInputError(f"simplex {tuple(simplex)} is flat")
    n = len(a)
    N = [_det([row[:j] + [bb] + row[j + 1:] for row, bb in zip(a, b)]) for j in range(n)]
    if _sign(D) < 0:
        D = -D
        N = [-v for v in N]
    return p0, N, D, sum(v * v for v in N)


def _scaled_sq(p0, N, D, q):
    """D^2 times the squared distance from q to the circumcenter."""
    return sum((D * (x - y) - v) ** 2 for x, y, v in zip(q, p0, N))


def circumsphere(coords, simplex):
    """Exact circumcenter and squared radius (in the coordinates given)."""
    p0, N, D, R = _circ_scaled(coords, simplex)
    if isinstance(D, int):
        c = tuple(x + Fraction(v, D) for x, v in zip(p0, N))
        return c, Fraction(R, D * D)
    return tuple(x + v / D for x, v in zip(p0, N)), R / (D * D)


def _at_least(d2, r2, delta) -> bool:
    """Exact test of sqrt(d2) >= sqrt(r2) + delta."""
    a = d2 - r2 - delta * delta
    if _sign(a) < 0:
        return False
    return _sign(a * a - 4 * delta * delta * r2) >= 0


def _gap(d2, r2) -> float:
    """sqrt(d2) - sqrt(r2), accurate when the two are close."""
    diff = float(d2 - r2)
    return diff / (math.sqrt(float(d2)) + math.sqrt(float(r2)))


# ---------------------------------------------------------------------------
# Delaunay complexes
# ---------------------------------------------------------------------------


@dataclass
class SimplexRecord:
    vertices: tuple
    circumcenter: tuple  # exact chart coordinates
    circumradius: float
    protection: float
    cospherical: tuple = ()

    def to_json(self):
        return {"vertices": list(self.vertices),
                "circumcenter": [format_scalar(c) for c in self.circumcenter],
                "circumradius": self.circumradius,
                "protection": self.protection if math.isfinite(self.protection) else "inf"}


@dataclass
class DelaunayResult:
    points: PointSet
    simplices: list  # chosen top simplices (sorted index tuples)
    records: dict
    complex: CellComplex
    degenerate: bool
    cospherical_groups: list
    empty_simplices: list  # every simplex with an empty open circumball

    @property
    def min_protection(self) -> float:
        return min((r.protection for r in self.records.values()), default=math.inf)

    def to_json(self):
        return {
            "points": self.points.to_json(),
            "simplices": [list(s) for s in self.simplices],
            "degenerate": self.degenerate,
            "cospherical_groups": [sorted(g) for g in self.cospherical_groups],
            "records": [self.records[s].to_json() for s in self.simplices],
            "complex": self.complex.to_json(),
        }


def _examine(ps: PointSet, simplex):
    """(empty, on_sphere, protection float, center, r2) for one simplex."""
    coords = ps.coords
    p0, N, D, R = _circ_scaled(coords, simplex)
    fD = float(D)
    cf = np.array([(float(x) + float(v) / fD) / ps.scale for x, v in zip(p0, N)])
    rf = math.sqrt(float(R)) / fD / ps.scale
    verts = set(simplex)
    cand = ps.kd.query_ball_point(cf, rf * (1 + 1e-7) + 1e-12)
    on = []
    for q in cand:
        if q in verts:
            continue
        s = _sign(_scaled_sq(p0, N, D, coords[q]) - R)
        if s < 0:
            return False, (), 0.0, (p0, N, D), R
        if s == 0:
            on.append(q)
    if on:
        return True, tuple(sorted(on)), 0.0, (p0, N, D), R
    n = len(ps)
    if n <= len(simplex):
        return True, (), math.inf, (p0, N, D), R
    k = min(n, len(simplex) + 1 + len(cand))
    while True:
        dist, idx = ps.kd.query(cf, k=k)
        idx = np.atleast_1d(idx)
        others = [int(i) for i in idx if int(i) not in verts]
        if others or k >= n:
            break
        k = min(n, 2 * k)
    best = math.inf
    for q in others:
        d2 = _scaled_sq(p0, N, D, coords[q])
        best = min(best, _gap(d2, R) / fD / ps.scale)
    return True, (), max(best, 0.0), (p0, N, D), R


def _unscale_center(ps, circ):
    p0, N, D = circ
    if isinstance(D, int):
        return tuple((x + Fraction(v, D)) / ps.scale for x, v in zip(p0, N))
    return tuple((x + v / D) / ps.scale for x, v in zip(p0, N))


def _full_rank_witness(ps: PointSet) -> bool:
    """Find a non-flat simplex greedily in floats and confirm it exactly."""
    f = ps.floats - ps.floats[0]
    chosen = [0]
    basis = []
    for _ in range(ps.dim):
        resid = f.copy()
        for b in basis:
            resid -= np.outer(resid @ b, b)
        norms = np.linalg.norm(resid, axis=1)
        k = int(np.argmax(norms))
        if norms[k] == 0:
            return False
        basis.append(resid[k] / norms[k])
        chosen.append(k)
    return len(set(chosen)) == ps.dim + 1 and orientation(ps.coords, chosen) != 0


def _affine_rank(ps: PointSet) -> int:
    if len(ps) > ps.dim and _full_rank_witness(ps):
        return ps.dim
    p0 = ps.points[0]
    rows = [[Fraction(a - b) if is_rational(a - b) else a - b for a, b in zip(p, p0)] for p in ps.points[1:]]
    if not ps.exact_integer:
        return int(np.linalg.matrix_rank(ps.floats[1:] - ps.floats[0]))
    return _linalg.rank(rows) if rows else 0


def _simplicial_complex(n, simplices) -> CellComplex:
    dim = len(simplices[0]) - 1 if simplices else 0
    faces = [dict() for _ in range(dim + 1)]
    for v in range(n):
        faces[0][(v,)] = v
    cells = [[[] for _ in range(n)]]
    for k in range(1, dim + 1):
        level = sorted({tuple(c) for s in simplices for c in itertools.combinations(s, k + 1)})
        faces[k] = {c: i for i, c in enumerate(level)}
        cells.append([[(faces[k - 1][c[:i] + c[i + 1:]], (-1) ** i) for i in range(k + 1)] for c in level])
    return CellComplex(cells)


def brute_force_empty_simplices(ps: PointSet) -> list:
    """Every non-flat (d+1)-subset whose open circumball contains no point."""
    coords = ps.coords
    out = []
    for s in itertools.combinations(range(len(ps)), ps.dim + 1):
        if orientation(coords, s) == 0:
            continue
        if all(insphere(coords, s, coords[q]) <= 0 for q in range(len(ps)) if q not in s):
            out.append(s)
    return out


def delaunay_complex(ps: PointSet, cap: int = 60, brute_force: bool = False) -> DelaunayResult:
    """Delaunay triangulation with exact verification.

    Qhull proposes the triangulation; each simplex is checked exactly for an
    empty open circumball and for cospherical extra points.  Inputs with
    cospherical points are flagged degenerate.  If a proposed simplex fails
    the exact check, the exact brute-force enumeration is used when the set
    has at most ``cap`` points.
    """
    d = ps.dim
    if d not in (2, 3):
        raise DelaunayError("Delaunay complexes are implemented for chart dimensions 2 and 3")
    if len(ps) < d + 1 or _affine_rank(ps) < d:
        raise DegenerateInputError("points do not span the chart (all collinear or coplanar)")
    chosen = None
    if not brute_force:
        tri = _QhullDelaunay(ps.floats)
        chosen = sorted(tuple(sorted(int(i) for i in s)) for s in tri.simplices)
    records = {}
    ok = chosen is not None
    if ok:
        for s in chosen:
            if orientation(ps.coords, s) == 0:
                ok = False
                break
            empty, on, delta, center, r2 = _examine(ps, s)
            if not empty:
                ok = False
                break
            records[s] = (on, delta, center, r2)
    if not ok:
        if len(ps) > cap:
            raise DelaunayError(f"floating-point triangulation failed exact checks and {len(ps)} points "
                                f"exceed the brute-force cap {cap}")
        empties = brute_force_empty_simplices(ps)
        records = {}
        for s in empties:
            _, on, delta, center, r2 = _examine(ps, s)
            records[s] = (on, delta, center, r2)
        if any(records[s][0] for s in empties):
            raise DegenerateInputError("cospherical input: the empty-ball simplices overlap and no "
                                       "verified triangulation is available")
        chosen = empties
    groups = []
    seen = set()
    for s in chosen:
        on = records[s][0]
        if on:
            g = frozenset(s) | frozenset(on)
            if g not in seen:
                seen.add(g)
                groups.append(g)
    empties = set(chosen)
    for g in groups:
        for s in itertools.combinations(sorted(g), d + 1):
            if orientation(ps.coords, s) != 0:
                empties.add(s)
    recs = {}
    for s in chosen:
        on, delta, center, r2 = records[s]
        recs[s] = SimplexRecord(s, _unscale_center(ps, center),
                                math.sqrt(float(r2)) / float(center[2]) / ps.scale, delta, on)
    return DelaunayResult(ps, chosen, recs, _simplicial_complex(len(ps), chosen), bool(groups),
                          groups, sorted(empties))


def protection(ps: PointSet, simplex) -> float:
    """Distance from the nearest non-vertex point to the circumsphere."""
    simplex = tuple(sorted(simplex))
    if orientation(ps.coords, simplex) == 0:
        raise NotDelaunayError(f"{simplex} is flat")
    empty, on, delta, _, _ = _examine(ps, simplex)
    if not empty:
        raise NotDelaunayError(f"{simplex} has a point inside its circumball")
    return delta


def is_protected(ps: PointSet, simplex, delta) -> bool:
    """Exact test that every non-vertex point is at least ``delta`` outside the circumsphere."""
    simplex = tuple(sorted(simplex))
    p0, N, D, R = _circ_scaled(ps.coords, simplex)
    delta = as_exact(delta) * ps.scale * D
    fD = float(D)
    cf = np.array([(float(x) + float(v) / fD) / ps.scale for x, v in zip(p0, N)])
    reach = (math.sqrt(float(R)) + float(delta)) / fD / ps.scale
    for q in ps.kd.query_ball_point(cf, reach * (1 + 1e-7) + 1e-12):
        if q in simplex:
            continue
        if not _at_least(_scaled_sq(p0, N, D, ps.coords[q]), R, delta):
            return False
    return True


def unprotected_simplices(ps: PointSet, result: DelaunayResult, delta, relevant=None) -> list:
    out = []
    for s in result.simplices:
        if relevant is not None and not relevant(result.records[s]):
            continue
        if result.records[s].cospherical or not is_protected(ps, s, delta):
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# nets
# ---------------------------------------------------------------------------


@dataclass
class NetReport:
    is_discrete: bool
    is_dense: bool
    min_distance: float
    covering_estimate: float
    witnesses: dict = field(default_factory=dict)

    def to_json(self):
        return {"is_discrete": self.is_discrete, "is_dense": self.is_dense,
                "min_distance": self.min_distance, "covering_estimate": self.covering_estimate,
                "witnesses": {k: [str(x) for x in v] for k, v in self.witnesses.items()}}


def check_net(ps: PointSet, mu, eps, region) -> NetReport:
    """Brute-force (mu*eps)-discreteness and eps-density on a box.

    ``region`` is a list of (lo, hi) pairs.  Density is sampled on a grid of
    pitch eps/4 over the region shrunk by eps on every side (the points
    outside the region are unknown), or at its centre if that is empty.
    """
    if len(ps) == 0:
        raise DelaunayError("empty point set")
    mu, eps = as_exact(mu), as_exact(eps)
    region = [(as_exact(lo), as_exact(hi)) for lo, hi in region]
    sep = mu * eps
    witnesses = {}
    discrete = True
    min_d = math.inf
    if len(ps) > 1:
        dist, idx = ps.kd.query(ps.floats, k=2)
        order = np.argsort(dist[:, 1])
        min_d = float(dist[order[0], 1])
        for i in order:
            j = int(idx[i, 1])
            if dist[i, 1] > float(sep) * (1 + 1e-9) + 1e-12:
                break
            d2 = sum((Fraction(a) - Fraction(b)) ** 2 if is_rational(a) and is_rational(b) else (a - b) ** 2
                     for a, b in zip(ps.points[i], ps.points[j]))
            if exact_sign(d2 - sep * sep) < 0:
                discrete = False
                witnesses["discreteness"] = (int(i), j)
                break
    axes = []
    for lo, hi in region:
        a, b = lo + eps, hi - eps
        if a > b:
            mid = (lo + hi) / 2
            axes.append(np.array([float(mid)]))
        else:
            steps = int(math.floor((b - a) / (eps / 4)))
            axes.append(np.array([float(a + i * eps / 4) for i in range(steps + 1)]))
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(region))
    dist, idx = ps.kd.query(grid, k=1)
    worst = int(np.argmax(dist))
    cover = float(dist[worst])
    dense = cover <= float(eps) * (1 + 1e-12)
    if not dense:
        witnesses["density"] = tuple(float(x) for x in grid[worst])
    return NetReport(discrete, dense, min_d, cover, witnesses)


# ---------------------------------------------------------------------------
# perturbation to genericity
# ---------------------------------------------------------------------------


@dataclass
class PerturbationResult:
    points: PointSet
    moved: set
    visited_bad: set
    min_protection: float
    attempts: int

    def to_json(self):
        return {"points": self.points.to_json(), "moved": sorted(self.moved),
                "min_protection": self.min_protection, "attempts": self.attempts}


def _random_offset(rng, rho, dim):
    k = 1 << 12
    while True:
        v = [rho * Fraction(rng.randint(-k, k), k) for _ in range(dim)]
        n2 = sum(x * x for x in v)
        if 0 < n2 < rho * rho:
            return v


def _local_state(ps, index, radius, delta, relevant):
    """Unprotected simplices of the Delaunay triangulation of the points near
    ``index`` whose vertices all lie within radius/2 of it."""
    if radius is None:
        sub = list(range(len(ps)))
    else:
        sub = sorted(ps.kd.query_ball_point(ps.floats[index], radius))
    local = PointSet([ps.points[i] for i in sub])
    if len(local) <= ps.dim or _affine_rank(local) < ps.dim:
        return set(), set()
    res = delaunay_complex(local, cap=40)
    near = set(range(len(sub))) if radius is None else {
        j for j, i in enumerate(sub) if np.linalg.norm(ps.floats[i] - ps.floats[index]) <= radius / 2}
    star = set()
    bad = set()
    for s in res.simplices:
        if not set(s) <= near:
            continue
        if relevant is not None and not relevant(res.records[s]):
            continue
        gs = tuple(sorted(sub[j] for j in s))
        if res.records[s].cospherical or not is_protected(local, s, delta):
            bad.add(gs)
        if index in gs:
            star.add(gs)
    return bad, {s for s in bad if index in s}


def perturb_until_generic(ps: PointSet, mesh: MeshParams, order=None, seed: int = 0,
                          max_tries: int = 200, relevant=None, movable=None,
                          window=None) -> PerturbationResult:
    """Move points (each by less than rho, each at most once) until every
    relevant Delaunay simplex is delta-protected.

    Points are visited in ``order``.  A point is moved only if, when visited,
    its star contains an unprotected simplex; a random move is accepted when
    its star becomes protected and no new unprotected simplex appears nearby.
    ``relevant`` filters simplex records (for instance to safe interior
    regions); ``movable`` restricts which points may move.
    """
    mesh.check_perturbation() if mesh.rho > 0 else None
    if mesh.rho <= 0:
        raise MeshError("perturbation needs rho > 0")
    rng = random.Random(seed)
    delta = mesh.delta
    res = delaunay_complex(ps)
    bad = unprotected_simplices(ps, res, delta, relevant)
    candidates = {v for s in bad for v in s}
    order = list(order) if order is not None else list(range(len(ps)))
    if window is None and len(ps) > 200:
        window = 6 * float(mesh.eps)
    cur = ps
    moved = set()
    visited_bad = set()
    attempts = 0
    for v in order:
        if v not in candidates:
            continue
        before, star_bad = _local_state(cur, v, window, delta, relevant)
        if not star_bad:
            continue
        visited_bad.add(v)
        if movable is not None and v not in movable:
            raise GenericityError(f"point {v} is not movable but its star is unprotected")
        for _ in range(max_tries):
            attempts += 1
            off = _random_offset(rng, mesh.rho, ps.dim)
            trial_pt = [a + b for a, b in zip(ps.points[v], off)]
            try:
                trial = cur.moved(v, trial_pt)
            except DelaunayError:
                continue
            try:
                after, star_after = _local_state(trial, v, window, delta, relevant)
            except DegenerateInputError:
                continue
            if not star_after and after <= before:
                cur = trial
                moved.add(v)
                break
        else:
            raise GenericityError(f"no acceptable move for point {v} after {max_tries} tries")
    final = delaunay_complex(cur)
    left = unprotected_simplices(cur, final, delta, relevant)
    if left:
        raise GenericityError(f"{len(left)} simplices remain unprotected, e.g. {left[0]}")
    rel = [final.records[s].protection for s in final.simplices
           if relevant is None or relevant(final.records[s])]
    return PerturbationResult(cur, moved, visited_bad, min(rel, default=math.inf), attempts)


# ---------------------------------------------------------------------------
# stars and stability
# ---------------------------------------------------------------------------


def star(result: DelaunayResult, X) -> frozenset:
    """Top simplices of the triangulation that contain a point of ``X``."""
    X = set(X)
    return frozenset(s for s in result.simplices if X & set(s))


def closed_star(result: DelaunayResult, X) -> frozenset:
    out = set()
    for s in star(result, X):
        for k in range(1, len(s) + 1):
            out.update(itertools.combinations(s, k))
    return frozenset(out)


def interior_points(ps: PointSet) -> list:
    """Indices of points not on the convex hull (exact)."""
    res = delaunay_complex(ps)
    boundary = set()
    count = {}
    for s in res.simplices:
        for f in itertools.combinations(s, ps.dim):
            count[f] = count.get(f, 0) + 1
    for f, c in count.items():
        if c == 1:
            boundary.update(f)
    return [i for i in range(len(ps)) if i not in boundary]


def star_stability_check(ps: PointSet, perturbed: PointSet, E, rho, bijection=None) -> bool:
    """True iff the perturbation maps star(E) isomorphically onto star(zeta(E)).

    ``bijection[i]`` is the index of zeta(point i) in ``perturbed`` (identity
    by default).  Raises if zeta is not a bijection or moves a point by rho
    or more.
    """
    n = len(ps)
    if len(perturbed) != n:
        raise DelaunayError("perturbation is not a bijection (sizes differ)")
    bij = list(range(n)) if bijection is None else list(bijection)
    if sorted(bij) != list(range(n)):
        raise DelaunayError("perturbation is not a bijection")
    rho = as_exact(rho)
    for i in range(n):
        d2 = sum((a - b) ** 2 for a, b in zip(ps.points[i], perturbed.points[bij[i]]))
        if exact_sign(d2 - rho * rho) >= 0:
            raise DelaunayError(f"point {i} moves by at least rho")
    before = star(delaunay_complex(ps), E)
    after = star(delaunay_complex(perturbed), [bij[i] for i in E])
    mapped = frozenset(tuple(sorted(bij[i] for i in s)) for s in before)
    return mapped == after


def random_perturbation(ps: PointSet, rho, rng: random.Random) -> PointSet:
    rho = as_exact(rho)
    return PointSet([[a + b for a, b in zip(p, _random_offset(rng, rho, ps.dim))] for p in ps.points],
                    ps.chart)


def find_stable_rho(ps: PointSet, E=None, rho0=Fraction(1, 4), trials: int = 100,
                    shrink=Fraction(1, 2), max_steps: int = 40, seed: int = 0):
    """Shrink rho geometrically until ``trials`` random rho-perturbations all
    preserve star(E).  Returns (rho, number of shrink steps)."""
    E = interior_points(ps) if E is None else list(E)
    rng = random.Random(seed)
    rho = as_exact(rho0)
    base = star(delaunay_complex(ps), E)
    for step in range(max_steps):
        ok = True
        for _ in range(trials):
            q = random_perturbation(ps, rho, rng)
            if star(delaunay_complex(q), E) != base:
                ok = False
                break
        if ok:
            return rho, step
        rho = rho * shrink
    raise GenericityError(f"no stable rho found down to {rho}")


def flip_perturbation(ps: PointSet, result: DelaunayResult, rho):
    """For a cocircular quadrilateral, push one endpoint of the chosen
    diagonal outward so that the other diagonal becomes Delaunay."""
    rho = as_exact(rho)
    if ps.dim != 2 or not result.cospherical_groups:
        raise DelaunayError("flip perturbation needs a cocircular planar configuration")
    group = sorted(result.cospherical_groups[0])
    tri = [s for s in result.simplices if set(s) <= set(group)]
    shared = set(tri[0]) & set(tri[1])
    a, b = sorted(shared)
    ca, cb = ps.points[a], ps.points[b]
    direction = [x - y for x, y in zip(cb, ca)]
    # move b outward along the diagonal by less than rho/2
    n2 = sum(x * x for x in direction)
    scale = rho / 2 / (math.ceil(math.sqrt(float(n2))) + 1)
    new_b = [x + scale * y for x, y in zip(cb, direction)]
    return ps.moved(b, new_b)


# ---------------------------------------------------------------------------
# theta schedules
# ---------------------------------------------------------------------------


@dataclass
class ThetaSchedule:
    thetas: list

    def __post_init__(self):
        self.thetas = [as_exact(t) for t in self.thetas]
        if any(t <= 0 for t in self.thetas):
            raise MeshError("theta values must be positive")
        for k in range(1, len(self.thetas)):
            if self.thetas[k] > self.thetas[k - 1] / 2:
                raise MeshError(f"theta_{k} exceeds half of theta_{k - 1}")

    def __getitem__(self, k):
        return self.thetas[k]

    def __len__(self):
        return len(self.thetas)

    def to_json(self):
        return [str(t) for t in self.thetas]


from ._prototiles import (  # noqa: E402  (uses the primitives above)
    CollaredTriangulation,
    check_geometric_normality,
    theta_schedule,
    triangulate_collared_prototiles,
)

__all__ = [
    "PointSet", "MeshParams", "SimplexRecord", "DelaunayResult", "NetReport", "PerturbationResult",
    "ThetaSchedule", "CollaredTriangulation", "DelaunayError", "DegenerateInputError",
    "NotDelaunayError", "GenericityError", "MeshError", "ResourceCapError",
    "check_net", "delaunay_complex", "protection", "is_protected", "unprotected_simplices",
    "brute_force_empty_simplices", "perturb_until_generic", "star", "closed_star", "interior_points",
    "star_stability_check", "random_perturbation", "find_stable_rho", "flip_perturbation",
    "orientation", "insphere", "circumsphere", "theta_schedule", "check_geometric_normality",
    "triangulate_collared_prototiles",
]
