"""Exact arithmetic in simply connected nilpotent Lie groups.

A group is described by rational structure constants ``c[i][j][k]`` of its
Lie algebra in a basis X_1..X_n.  Elements carry coordinates in one of two
conventions:

``canonical``
    exponential coordinates, g = exp(sum_k g_k X_k); products go through the
    Baker-Campbell-Hausdorff series, which is finite for nilpotent algebras.
``polarized``
    only for the Heisenberg group (and trivially for abelian groups): the
    upper unitriangular matrix coordinates with law
    (x, y, z)(x', y', z') = (x + x', y + y', z + x y' + z').
    The two conventions are related by z_canonical = z_polarized - x y / 2.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

from . import _linalg
from .scalar import (
    ExactScalar,
    as_exact,
    exact_sign,
    format_scalar,
    galois_conjugate,
    is_rational,
    parse_scalar,
)

CANONICAL = "canonical"
POLARIZED = "polarized"
CONVENTIONS = (CANONICAL, POLARIZED)

ZERO = Fraction(0)


class StructureError(ValueError):
    """Structure constants fail antisymmetry, Jacobi or nilpotency."""


class StructureConstants:
    """Rational structure constants of a nilpotent Lie algebra.

    ``coefficients`` maps ``(i, j)`` to ``{k: c_ijk}``; entries for ``(j, i)``
    are filled in by antisymmetry and must agree if given.
    """

    def __init__(self, dim: int, coefficients: dict | None = None):
        if dim < 1:
            raise StructureError("dimension must be positive")
        self.dim = dim
        table = [[dict() for _ in range(dim)] for _ in range(dim)]
        for (i, j), out in (coefficients or {}).items():
            if not (0 <= i < dim and 0 <= j < dim):
                raise StructureError(f"index out of range: {(i, j)}")
            for k, c in out.items():
                c = as_exact(c)
                if not is_rational(c):
                    raise StructureError("structure constants must be rational")
                if c == 0:
                    continue
                if i == j:
                    raise StructureError(f"[X{i},X{i}] must vanish")
                for (a, b, v) in ((i, j, c), (j, i, -c)):
                    prev = table[a][b].get(k)
                    if prev is not None and prev != v:
                        raise StructureError(f"not antisymmetric at {(i, j, k)}")
                    table[a][b][k] = v
        self.table = tuple(tuple(tuple(sorted(d.items())) for d in row) for row in table)
        self._check_jacobi()
        self.central_series = self._lower_central_series()
        self.step = len(self.central_series) - 1
        self.weights = self._coordinate_weights()

    # -- construction checks ----------------------------------------------

    def _check_jacobi(self):
        n = self.dim
        basis = [_unit(n, i) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    a = self.bracket(basis[i], self.bracket(basis[j], basis[k]))
                    b = self.bracket(basis[j], self.bracket(basis[k], basis[i]))
                    c = self.bracket(basis[k], self.bracket(basis[i], basis[j]))
                    if any(x + y + z != 0 for x, y, z in zip(a, b, c)):
                        raise StructureError(f"Jacobi identity fails on {(i, j, k)}")

    def _lower_central_series(self):
        n = self.dim
        series = [_linalg.identity(n)]
        series[0] = [[Fraction(v) for v in row] for row in series[0]]
        while series[-1]:
            nxt = _linalg.span_basis(
                self.bracket(_unit(n, i), v) for i in range(n) for v in series[-1]
            )
            if len(nxt) == len(series[-1]):
                raise StructureError("lower central series does not terminate: not nilpotent")
            series.append(nxt)
        return series

    def _coordinate_weights(self):
        # weight of X_k: deepest term of the lower central series containing it
        weights = []
        for k in range(self.dim):
            w = 1
            for depth in range(1, len(self.central_series)):
                if self.central_series[depth] and _linalg.in_span(
                    self.central_series[depth], _unit(self.dim, k)
                ):
                    w = depth + 1
            weights.append(w)
        return tuple(weights)

    # -- queries -------------------------------------------------------

    @property
    def is_abelian(self) -> bool:
        return self.step == 1

    @property
    def is_triangular(self) -> bool:
        """Every bracket [X_i, X_j] lies in the span of X_k with k > max(i, j).

        In that case lexicographic order of coordinates is invariant under
        left translation.
        """
        for i in range(self.dim):
            for j in range(self.dim):
                for k, _ in self.table[i][j]:
                    if k <= max(i, j):
                        return False
        return True

    def bracket(self, x: Sequence, y: Sequence) -> list:
        out = [ZERO] * self.dim
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            row = self.table[i]
            for j, yj in enumerate(y):
                if yj == 0:
                    continue
                for k, c in row[j]:
                    out[k] = out[k] + c * xi * yj
        return out

    def __eq__(self, other):
        return isinstance(other, StructureConstants) and self.table == other.table

    def __hash__(self):
        return hash(self.table)

    def to_json(self):
        entries = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k, c in self.table[i][j]:
                    entries.append([i, j, k, format_scalar(c)])
        return {"dim": self.dim, "brackets": entries}

    @classmethod
    def from_json(cls, data):
        coeffs = {}
        for i, j, k, c in data["brackets"]:
            coeffs.setdefault((i, j), {})[k] = parse_scalar(str(c))
        return cls(int(data["dim"]), coeffs)


def _unit(n, i):
    v = [ZERO] * n
    v[i] = Fraction(1)
    return v


def lie_bracket(x: Sequence, y: Sequence, sc: StructureConstants) -> list:
    """[x, y] for algebra vectors given as coordinate sequences."""
    if len(x) != sc.dim or len(y) != sc.dim:
        raise ValueError(f"dimension mismatch: {len(x)}, {len(y)} vs {sc.dim}")
    return sc.bracket([as_exact(v) for v in x], [as_exact(v) for v in y])


# -- Baker-Campbell-Hausdorff ------------------------------------------------


@lru_cache(maxsize=None)
def _dynkin_terms(step: int):
    """Right-nested bracket words of the BCH series up to total degree ``step``.

    Returns a tuple of (coefficient, word) where word is a string over 'XY'
    denoting ad_{w0} ad_{w1} ... (w_last).
    """
    acc: dict = {}
    for n in range(1, step + 1):
        # n blocks (r_i, s_i), each with r_i + s_i >= 1, total <= step
        blocks = [(r, s) for r in range(step + 1) for s in range(step + 1) if 1 <= r + s <= step]
        for choice in product(blocks, repeat=n):
            m = sum(r + s for r, s in choice)
            if m > step:
                continue
            denom = m
            word = ""
            for r, s in choice:
                denom *= math.factorial(r) * math.factorial(s)
                word += "X" * r + "Y" * s
            coeff = Fraction((-1) ** (n - 1), n * denom)
            acc[word] = acc.get(word, ZERO) + coeff
    terms = []
    for word, c in sorted(acc.items(), key=lambda kv: (len(kv[0]), kv[0])):
        if c == 0:
            continue
        # words ending in a repeated letter bracket to zero
        if len(word) >= 2 and word[-1] == word[-2]:
            continue
        terms.append((c, word))
    return tuple(terms)


def bch(x: Sequence, y: Sequence, sc: StructureConstants) -> list:
    """log(exp x exp y), exact, truncated at the nilpotency step."""
    n = sc.dim
    out = [ZERO] * n
    letters = {"X": list(x), "Y": list(y)}
    cache: dict = {}
    for c, word in _dynkin_terms(sc.step):
        v = cache.get(word)
        if v is None:
            v = letters[word[-1]]
            for i in range(len(word) - 2, -1, -1):
                suffix = word[i:]
                hit = cache.get(suffix)
                if hit is None:
                    hit = sc.bracket(letters[word[i]], v)
                    cache[suffix] = hit
                v = hit
            cache[word] = v
        for k in range(n):
            if v[k] != 0:
                out[k] = out[k] + c * v[k]
    return out


# -- groups and elements -------------------------------------------------------


class Group:
    """A simply connected nilpotent Lie group over exact scalars."""

    def __init__(self, sc: StructureConstants, name: str = "custom",
                 default_convention: str = CANONICAL):
        self.sc = sc
        self.name = name
        if default_convention == POLARIZED and not self.supports_polarized:
            raise ValueError("polarized coordinates are only defined for the Heisenberg group")
        self.default_convention = default_convention

    @property
    def dim(self) -> int:
        return self.sc.dim

    @property
    def is_abelian(self) -> bool:
        return self.sc.is_abelian

    @property
    def is_heisenberg(self) -> bool:
        return self.sc == _HEIS_SC

    @property
    def supports_polarized(self) -> bool:
        return self.is_abelian or self.is_heisenberg

    @classmethod
    def heisenberg(cls, convention: str = POLARIZED) -> "Group":
        return cls(_HEIS_SC, "heisenberg", convention)

    @classmethod
    def euclidean(cls, n: int) -> "Group":
        return cls(StructureConstants(n), f"R{n}", CANONICAL)

    def __eq__(self, other):
        return isinstance(other, Group) and self.sc == other.sc

    def __hash__(self):
        return hash(self.sc)

    def __repr__(self):
        return f"Group({self.name}, dim={self.dim})"

    def element(self, coords, convention: str | None = None) -> "GroupElement":
        return GroupElement(self, coords, convention or self.default_convention)

    def identity(self, convention: str | None = None) -> "GroupElement":
        return self.element([0] * self.dim, convention)

    # conversions on raw coordinate lists
    def to_canonical_coords(self, coords, convention):
        if convention == CANONICAL or self.is_abelian:
            return list(coords)
        if not self.is_heisenberg:
            raise ValueError("polarized coordinates are only defined for the Heisenberg group")
        x, y, z = coords
        return [x, y, z - x * y / 2]

    def from_canonical_coords(self, coords, convention):
        if convention == CANONICAL or self.is_abelian:
            return list(coords)
        if not self.is_heisenberg:
            raise ValueError("polarized coordinates are only defined for the Heisenberg group")
        x, y, z = coords
        return [x, y, z + x * y / 2]

    def to_json(self):
        if self.is_heisenberg:
            return {"name": "heisenberg"}
        if self.is_abelian:
            return {"name": "euclidean", "dim": self.dim}
        return {"name": self.name, "structure": self.sc.to_json()}

    @classmethod
    def from_json(cls, data, convention: str | None = None):
        name = data.get("name")
        if name in ("heisenberg", "heis"):
            return cls.heisenberg(convention or POLARIZED)
        if name in ("euclidean", "R"):
            return cls.euclidean(int(data["dim"]))
        return cls(StructureConstants.from_json(data["structure"]), name or "custom",
                   convention or CANONICAL)


_HEIS_SC = StructureConstants(3, {(0, 1): {2: 1}})


class GroupElement:
    """Immutable group element with coordinates in a fixed convention."""

    __slots__ = ("group", "coords", "convention", "_canon")

    def __init__(self, group: Group, coords, convention: str = CANONICAL):
        if convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {convention!r}")
        coords = tuple(as_exact(c) for c in coords)
        if len(coords) != group.dim:
            raise ValueError(f"expected {group.dim} coordinates, got {len(coords)}")
        if convention == POLARIZED and not group.supports_polarized:
            raise ValueError("polarized coordinates are only defined for the Heisenberg group")
        if group.is_abelian:
            convention = group.default_convention
        self.group = group
        self.coords = coords
        self.convention = convention
        self._canon = None

    @classmethod
    def _raw(cls, group, coords, convention):
        # trusted internal constructor: coords already exact, convention valid
        obj = cls.__new__(cls)
        obj.group = group
        obj.coords = tuple(coords)
        obj.convention = convention
        obj._canon = None
        return obj

    @property
    def canonical_coords(self) -> tuple:
        if self._canon is None:
            self._canon = tuple(self.group.to_canonical_coords(self.coords, self.convention))
        return self._canon

    def to_convention(self, convention: str) -> "GroupElement":
        if convention == self.convention or self.group.is_abelian:
            return self
        return GroupElement(
            self.group, self.group.from_canonical_coords(self.canonical_coords, convention),
            convention,
        )

    def to_canonical(self) -> "GroupElement":
        return self.to_convention(CANONICAL)

    def to_polarized(self) -> "GroupElement":
        return self.to_convention(POLARIZED)

    def _check(self, other):
        if not isinstance(other, GroupElement):
            raise TypeError("expected a GroupElement")
        if other.group != self.group:
            raise ValueError("elements belong to different groups")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        """Product in the native law of ``self``'s convention."""
        if not isinstance(other, GroupElement):
            return NotImplemented
        self._check(other)
        g = self.group
        if g.is_abelian:
            return GroupElement._raw(g, [a + b for a, b in zip(self.coords, other.coords)],
                                     self.convention)
        if self.convention == POLARIZED:
            x, y, z = self.coords
            xo, yo, zo = other.to_convention(POLARIZED).coords
            return GroupElement._raw(g, (x + xo, y + yo, z + x * yo + zo), POLARIZED)
        return bch_multiply(self, other)

    def inverse(self) -> "GroupElement":
        if self.convention == POLARIZED and not self.group.is_abelian:
            x, y, z = self.coords
            return GroupElement._raw(self.group, (-x, -y, -z + x * y), POLARIZED)
        return GroupElement._raw(self.group, [-c for c in self.coords], self.convention)

    def __invert__(self):
        return self.inverse()

    def __pow__(self, n: int) -> "GroupElement":
        # exp(n v) = exp(v)^n in canonical coordinates
        c = [n * v for v in self.canonical_coords]
        return GroupElement(self.group, c, CANONICAL).to_convention(self.convention)

    def is_identity(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self) -> bool:
        return all(is_rational(c) for c in self.coords)

    def conjugate(self) -> "GroupElement":
        """Galois conjugate, coordinatewise."""
        return GroupElement(self.group, [galois_conjugate(c) for c in self.coords],
                            self.convention)

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group == other.group and self.canonical_coords == other.canonical_coords

    def __hash__(self):
        return hash(self.canonical_coords)

    def __repr__(self):
        inner = ", ".join(format_scalar(c) for c in self.coords)
        tag = "" if self.group.is_abelian else f", {self.convention}"
        return f"<{inner}{tag}>"

    def floats(self) -> tuple:
        return tuple(float(c) for c in self.coords)

    def to_json(self):
        return {"convention": self.convention, "coords": [format_scalar(c) for c in self.coords]}

    @classmethod
    def from_json(cls, group: Group, data):
        if isinstance(data, dict):
            return cls(group, [parse_scalar(str(c)) for c in data["coords"]],
                       data.get("convention", group.default_convention))
        return cls(group, [parse_scalar(str(c)) for c in data], group.default_convention)


def bch_multiply(g: GroupElement, h: GroupElement, sc: StructureConstants | None = None) -> GroupElement:
    """Product computed through canonical coordinates and the BCH series.

    The result is returned in the convention of ``g``.
    """
    g._check(h)
    if sc is not None and sc != g.group.sc:
        raise ValueError("structure constants do not match the elements' group")
    c = bch(g.canonical_coords, h.canonical_coords, g.group.sc)
    return GroupElement(g.group, c, CANONICAL).to_convention(g.convention)


def inverse(g: GroupElement) -> GroupElement:
    return g.inverse()


def commutator(g: GroupElement, h: GroupElement) -> GroupElement:
    """g h g^-1 h^-1."""
    return g * h * g.inverse() * h.inverse()


def proxy_norm_coords(group: Group, canonical) -> float:
    if group.is_abelian:
        return math.sqrt(sum(float(c) ** 2 for c in canonical))
    return max(abs(float(c)) ** (1.0 / w) for c, w in zip(canonical, group.sc.weights))


def proxy_norm(g: GroupElement) -> float:
    """Homogeneous norm of ``g`` (Euclidean for abelian groups)."""
    return proxy_norm_coords(g.group, g.canonical_coords)


def proxy_distance(g: GroupElement, h: GroupElement) -> float:
    """Left-invariant distance proxy: the homogeneous norm of g^-1 h."""
    g._check(h)
    return proxy_norm(g.inverse() * h)


def proxy_norm_below(g: GroupElement, rho) -> bool:
    """Exact test of ``proxy_norm(g) < rho`` for rational ``rho``."""
    rho = as_exact(rho)
    c = g.canonical_coords
    if g.group.is_abelian:
        return exact_sign(sum((v * v for v in c), ZERO) - rho * rho) < 0
    return all(exact_sign(abs(v) - rho ** w) < 0 for v, w in zip(c, g.group.sc.weights))


def proxy_distance_below(g: GroupElement, h: GroupElement, rho) -> bool:
    g._check(h)
    return proxy_norm_below(g.inverse() * h, rho)
