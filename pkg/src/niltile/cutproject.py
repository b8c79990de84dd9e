"""Cut-and-project point sets in the Heisenberg group over Z[sqrt2], and
finite-local-complexity censuses of point sets up to left translation.

The lattice is {(a, b, c, a*, b*, c*) : a, b, c in Z[sqrt2]} inside H x H,
with * the Galois conjugation sqrt2 -> -sqrt2.  Coordinates are polarized:
there the group law uses only ring operations, so conjugation is a group
homomorphism and the lattice is a subgroup.  A point (a, b, c) is kept when
each conjugate coordinate lies in the closed window [-w, w].  Since the
window is a box, the set is the product of three one-dimensional model sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .delaunay import DelaunayError, PointSet
from .nilgroup import POLARIZED, Group, proxy_norm, proxy_norm_below
from .scalar import QSqrt2, as_exact, exact_sign, format_scalar, galois_conjugate, parse_scalar

HEIS_CHART = "heisenberg-polarized"


class CutProjectError(ValueError):
    pass


def _box(region):
    box = [(as_exact(lo), as_exact(hi)) for lo, hi in region]
    for lo, hi in box:
        if exact_sign(hi - lo) < 0:
            raise CutProjectError("region has an empty side")
    return box


@dataclass(frozen=True)
class ModelSetSpec:
    """Window half-width and a bounded coordinate box of H (polarized coordinates)."""

    region: tuple
    w: object = field(default_factory=lambda: as_exact("1/2"))

    def __post_init__(self):
        if self.region is None or len(self.region) != 3:
            raise CutProjectError("region must be a bounded box with three (lo, hi) sides")
        for side in self.region:
            if side is None or any(v is None for v in side):
                raise CutProjectError("region must be bounded")
            for v in side:
                if isinstance(v, float) and not math.isfinite(v):
                    raise CutProjectError("region must be bounded")
        object.__setattr__(self, "region", tuple(_box(self.region)))
        object.__setattr__(self, "w", as_exact(self.w))
        if exact_sign(self.w) <= 0:
            raise CutProjectError("window half-width must be positive")

    @classmethod
    def cube(cls, width, w="1/2"):
        h = as_exact(width) / 2
        return cls(((-h, h), (-h, h), (-h, h)), w)

    def to_json(self):
        return {"region": [[format_scalar(lo), format_scalar(hi)] for lo, hi in self.region],
                "window": format_scalar(self.w)}


@dataclass(frozen=True)
class ModelSetPoint:
    coords: tuple

    @property
    def star(self) -> tuple:
        return tuple(galois_conjugate(c) for c in self.coords)


def model_set_1d(lo, hi, w) -> list:
    """Sorted m + n*sqrt2 in [lo, hi] whose conjugate m - n*sqrt2 lies in [-w, w]."""
    lo, hi, w = as_exact(lo), as_exact(hi), as_exact(w)
    s2 = math.sqrt(2)
    flo, fhi, fw = float(lo), float(hi), float(w)
    out = []
    # x - x* = 2 n sqrt2 and x + x* = 2 m
    for n in range(math.floor((flo - fw) / (2 * s2)) - 1, math.ceil((fhi + fw) / (2 * s2)) + 2):
        m_lo = max(flo - n * s2, -fw + n * s2)
        m_hi = min(fhi - n * s2, fw + n * s2)
        for m in range(math.floor(m_lo) - 1, math.ceil(m_hi) + 2):
            x = QSqrt2.make(m, n)
            xs = QSqrt2.make(m, -n)
            if (exact_sign(x - lo) >= 0 and exact_sign(hi - x) >= 0
                    and exact_sign(xs + w) >= 0 and exact_sign(w - xs) >= 0):
                out.append(x)
    return sorted(out)


def model_set_points(spec: ModelSetSpec) -> list:
    axes = [model_set_1d(lo, hi, spec.w) for lo, hi in spec.region]
    return [ModelSetPoint((a, b, c)) for a in axes[0] for b in axes[1] for c in axes[2]]


def generate(spec: ModelSetSpec) -> PointSet:
    """The cut-and-project set inside the region, as a PointSet in polarized coordinates."""
    pts = [p.coords for p in model_set_points(spec)]
    if not pts:
        raise CutProjectError("no points of the model set lie in the region")
    return PointSet(pts, HEIS_CHART, spec.region)


def neighbor_displacements(ps: PointSet, axis) -> set:
    """Differences between consecutive points on coordinate lines along ``axis``.

    Points are on the same line when all other coordinates agree.  Returns
    both signs of every gap.  A set with no two points on a common line
    gives the empty set.
    """
    k = {"x": 0, "y": 1, "z": 2}.get(axis, axis)
    if not isinstance(k, int) or not 0 <= k < ps.dim:
        raise CutProjectError(f"bad axis {axis!r}")
    lines = {}
    for p in ps.points:
        key = p[:k] + p[k + 1:]
        lines.setdefault(key, []).append(p[k])
    out = set()
    for vals in lines.values():
        vals.sort()
        for a, b in zip(vals, vals[1:]):
            out.add(b - a)
            out.add(a - b)
    return out


def _group_for(ps: PointSet) -> Group:
    if ps.chart == HEIS_CHART:
        return Group.heisenberg(POLARIZED)
    if ps.chart == "identity":
        return Group.euclidean(ps.dim)
    raise CutProjectError(f"no group known for chart {ps.chart!r}")


def _ball_box(group, p, r):
    """Coordinate box containing the open proxy ball of radius r about p."""
    r = float(r)
    if group.is_abelian:
        return [(c - r, c + r) for c in p]
    # polarized: p * (a, b, c) = (x + a, y + b, z + c + x b) with |a|, |b| < r
    # and |c - ab/2| < r^2
    x, y, z = p
    spread = 1.5 * r * r + abs(x) * r
    return [(x - r, x + r), (y - r, y + r), (z - spread, z + spread)]


@dataclass
class CensusReport:
    count: int
    representatives: list  # one translated patch (sorted coordinate tuples) per class
    centers: int  # centres whose ball lies inside the region
    excluded: int
    min_spacing: float
    class_of: dict  # centre index -> class index

    def to_json(self):
        return {
            "count": self.count,
            "centers": self.centers,
            "excluded": self.excluded,
            "min_spacing": self.min_spacing,
            "representatives": [[[format_scalar(c) for c in q] for q in rep] for rep in self.representatives],
        }


def _translated_patch(group, p, others, r, floats=None):
    r2 = r * r
    if group.is_abelian:
        out = []
        for q in others:
            d = tuple(a - b for a, b in zip(q, p))
            if exact_sign(sum(x * x for x in d) - r2) < 0:
                out.append(d)
        return out
    if group.is_heisenberg and group.default_convention == POLARIZED:
        x, y, z = p
        out = []
        if others and floats is not None:
            # float screen: drop candidates clearly outside the ball
            Q = floats
            fx, fy, fz, fr = float(x), float(y), float(z), float(r)
            fa, fb = Q[:, 0] - fx, Q[:, 1] - fy
            fc = Q[:, 2] - fz - fx * fb - fa * fb / 2
            tol = 1e-9 * (1 + abs(fx) + abs(fz) + fr * fr)
            keep = (np.abs(fa) < fr + tol) & (np.abs(fb) < fr + tol) & (np.abs(fc) < fr * fr + tol)
            others = [q for q, k in zip(others, keep) if k]
        for q in others:
            a, b = q[0] - x, q[1] - y
            c = q[2] - z - x * b
            # proxy norm in canonical coordinates (a, b, c - ab/2)
            if (exact_sign(abs(a) - r) < 0 and exact_sign(abs(b) - r) < 0
                    and exact_sign(abs(c - a * b / 2) - r2) < 0):
                out.append((a, b, c))
        return out
    g = group.element(p)
    gi = g.inverse()
    patch = []
    for q in others:
        h = gi * group.element(q)
        if proxy_norm_below(h, r):
            patch.append(tuple(h.coords))
    return patch


def flc_census(ps: PointSet, r, region=None) -> CensusReport:
    """Classes of open r-ball patches up to exact left translation.

    Each patch is translated so its centre is the identity and compared as
    an exact set of coordinates.  Centres whose ball is not contained in the
    region are left out, since their patches may be truncated.
    """
    r = as_exact(r)
    group = _group_for(ps)
    region = region if region is not None else ps.region
    if region is None:
        raise CutProjectError("census needs the region the points were taken from")
    box = [(float(lo), float(hi)) for lo, hi in region]
    F = ps.floats
    classes = {}
    reps = []
    class_of = {}
    excluded = 0
    spacing = math.inf
    slack = 1e-9
    for i, p in enumerate(ps.points):
        bb = _ball_box(group, [float(c) for c in p], r)
        if any(b[0] < lo - slack or b[1] > hi + slack for b, (lo, hi) in zip(bb, box)):
            excluded += 1
            continue
        if any(b[0] <= lo + slack or b[1] >= hi - slack for b, (lo, hi) in zip(bb, box)):
            # near a tie, only an exact containment check would do; stay conservative
            excluded += 1
            continue
        mask = np.ones(len(ps), dtype=bool)
        for d, (lo, hi) in enumerate(bb):
            mask &= (F[:, d] > lo - slack) & (F[:, d] < hi + slack)
        idx = np.nonzero(mask)[0]
        others = [ps.points[j] for j in idx]
        patch = _translated_patch(group, p, others, r, F[idx])
        for q in patch:
            if any(c != 0 for c in q):
                spacing = min(spacing, _norm(group, q))
        key = frozenset(patch)
        if key not in classes:
            classes[key] = len(reps)
            reps.append(sorted(patch))
        class_of[i] = classes[key]
    return CensusReport(len(reps), reps, len(class_of), excluded, spacing, class_of)


def _norm(group, coords) -> float:
    if group.is_heisenberg and group.default_convention == POLARIZED:
        a, b, c = (float(v) for v in coords)
        return max(abs(a), abs(b), math.sqrt(abs(c - a * b / 2)))
    return proxy_norm(group.element(coords))


def fault_line_points(half_width, height=4) -> PointSet:
    """Vertices of unit squares above the x-axis and side-sqrt2 squares below it."""
    hw = as_exact(half_width)
    height = as_exact(height)
    pts = set()
    for i in range(-math.ceil(float(hw)), math.ceil(float(hw)) + 1):
        for j in range(0, math.floor(float(height)) + 1):
            if exact_sign(hw - abs(as_exact(i))) >= 0:
                pts.add((as_exact(i), as_exact(j)))
    n = math.ceil(float(hw) / math.sqrt(2)) + 1
    m = math.ceil(float(height) / math.sqrt(2)) + 1
    for i in range(-n, n + 1):
        for j in range(-m, 1):
            x, y = QSqrt2.make(0, i), QSqrt2.make(0, j)
            if exact_sign(hw - abs(x)) >= 0 and exact_sign(y + height) >= 0:
                pts.add((as_exact(x), as_exact(y)))
    region = ((-hw, hw), (-height, height))
    return PointSet(sorted(pts, key=lambda p: (float(p[0]), float(p[1]))), "identity", region)


def parse_region(text: str) -> tuple:
    vals = [parse_scalar(v) for v in text.split(",")]
    if len(vals) % 2:
        raise CutProjectError("region needs lo,hi pairs")
    return tuple((vals[i], vals[i + 1]) for i in range(0, len(vals), 2))


__all__ = [
    "CutProjectError", "ModelSetSpec", "ModelSetPoint", "model_set_1d", "model_set_points", "generate",
    "neighbor_displacements", "flc_census", "CensusReport", "fault_line_points", "parse_region",
    "HEIS_CHART", "DelaunayError",
]
