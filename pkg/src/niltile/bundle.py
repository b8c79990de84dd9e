"""Lattices containing a rational displacement set, and the projection of a
tiling to the compact quotient G / lattice.

A lattice is stored as a triangular basis b_1..b_n: b_k has canonical
coordinates zero before position k and a positive modulus d_k at position k.
For triangular structure constants the span of X_{k+1}..X_n is an ideal and
X_k is central modulo it, so coordinate k is additive on elements whose
earlier coordinates vanish.  That makes sifting (membership) and
coordinate-by-coordinate reduction exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import _linalg
from .complex import TilingInstance
from .nilgroup import CANONICAL, Group, GroupElement, StructureError, commutator
from .scalar import floor_exact, format_scalar, parse_scalar


class LatticeError(ValueError):
    pass


def _power(g: GroupElement, t) -> GroupElement:
    """exp(t log g) for an exact scalar t."""
    c = [t * v for v in g.canonical_coords]
    return GroupElement(g.group, c, CANONICAL).to_convention(g.convention)


def _lead(g: GroupElement):
    for k, c in enumerate(g.canonical_coords):
        if c != 0:
            return k
    return None


def lie_closure_rank(group: Group, vectors) -> int:
    """Dimension of the Lie subalgebra generated by ``vectors``."""
    sc = group.sc
    basis = _linalg.span_basis(vectors)
    while True:
        new = _linalg.span_basis(list(basis) + [sc.bracket(a, b) for a in basis for b in basis])
        if len(new) == len(basis):
            return len(basis)
        basis = new


class Lattice:
    """Discrete cocompact subgroup given by a triangular basis."""

    def __init__(self, group: Group, generators, basis):
        self.group = group
        self.generators = list(generators)
        self.basis = list(basis)
        if len(self.basis) != group.dim or any(b is None for b in self.basis):
            raise LatticeError("basis does not have one element per coordinate")
        self.moduli = [b.canonical_coords[k] for k, b in enumerate(self.basis)]

    def __repr__(self):
        return f"Lattice(moduli={[format_scalar(m) for m in self.moduli]})"

    def sift(self, g: GroupElement):
        """Real exponents t with g = b_1^t_1 ... b_n^t_n."""
        exps = []
        for k, b in enumerate(self.basis):
            t = g.canonical_coords[k] / self.moduli[k]
            exps.append(t)
            g = _power(b, -t) * g
        if not g.is_identity():
            raise LatticeError("sifting left a nonzero remainder")
        return exps

    def contains(self, g: GroupElement) -> bool:
        return all(isinstance(t, (int, Fraction)) and Fraction(t).denominator == 1
                   for t in self.sift(g))

    def word(self, exponents) -> GroupElement:
        out = self.group.identity()
        for b, t in zip(self.basis, exponents):
            out = out * _power(b, t)
        return out

    def check_closure(self) -> bool:
        """Products, inverses and commutators of basis elements stay inside."""
        for a in self.basis:
            if not self.contains(a.inverse()):
                return False
            for b in self.basis:
                if not (self.contains(a * b) and self.contains(commutator(a, b))):
                    return False
        return all(self.contains(s) for s in self.generators)

    def to_json(self):
        return {
            "group": self.group.to_json(),
            "convention": self.group.default_convention,
            "generators": [g.to_json() for g in self.generators],
            "basis": [b.to_json() for b in self.basis],
            "moduli": [format_scalar(m) for m in self.moduli],
        }

    @classmethod
    def from_json(cls, data):
        group = Group.from_json(data["group"], data.get("convention"))
        gens = [GroupElement.from_json(group, g) for g in data["generators"]]
        basis = [GroupElement.from_json(group, b) for b in data["basis"]]
        return cls(group, gens, basis)


def lattice_containing(S) -> Lattice:
    """Smallest lattice with a triangular basis that contains every element of ``S``.

    The generated subgroup is collected into triangular form by Euclid steps
    on leading coordinates, and closed under commutators and conjugation
    until nothing changes.
    """
    S = list(S)
    if not S:
        raise LatticeError("empty generating set")
    group = S[0].group
    if not group.sc.is_triangular:
        raise StructureError("lattice construction needs triangular structure constants")
    for s in S:
        if not s.is_rational():
            raise LatticeError(f"generator {s} has irrational coordinates")
    if lie_closure_rank(group, [s.canonical_coords for s in S]) < group.dim:
        raise LatticeError("the generators do not Lie-generate the whole algebra")
    basis = [None] * group.dim
    queue = list(S)

    def insert(g):
        changed = []
        while not g.is_identity():
            k = _lead(g)
            b = basis[k]
            if b is None:
                if g.canonical_coords[k] < 0:
                    g = g.inverse()
                basis[k] = g
                changed.append(g)
                return changed
            # Euclid on the k-th coordinate between b and g
            while g.canonical_coords[k] != 0:
                q = floor_exact(g.canonical_coords[k] / b.canonical_coords[k])
                g = b ** (-q) * g
                if g.canonical_coords[k] != 0:
                    b, g = g, b
            if b.canonical_coords[k] < 0:
                b = b.inverse()
            if b != basis[k]:
                basis[k] = b
                changed.append(b)
        return changed

    while queue:
        g = queue.pop()
        for new in insert(g):
            for b in basis:
                if b is None:
                    continue
                queue.append(commutator(new, b))
                queue.append(commutator(new.inverse(), b))
                queue.append(commutator(b.inverse(), new))
    if any(b is None for b in basis):
        raise LatticeError("generated subgroup is not cocompact")
    lat = Lattice(group, S, basis)
    if not lat.check_closure():
        raise LatticeError("triangular basis failed the closure check")
    return lat


def integer_lattice(group: Group) -> Lattice:
    """Lattice generated by the coordinate unit elements."""
    units = [group.element([1 if i == k else 0 for i in range(group.dim)]) for k in range(group.dim)]
    return lattice_containing(units)


def reduce_mod(lattice: Lattice, g: GroupElement):
    """(rep, lam) with g = rep * lam, rep having lattice exponents in [0, 1).

    Works from the first coordinate (top of the lower central series) down:
    right multiplication by b_k^-m changes exponent k by -m and leaves
    earlier exponents alone.
    """
    parts = []
    for k, b in enumerate(lattice.basis):
        t = lattice.sift(g)[k]
        m = floor_exact(t)
        if m:
            g = g * b ** (-m)
            parts.append(b ** m)
    lam = lattice.group.identity(g.convention)
    for p in reversed(parts):
        lam = lam * p
    return g, lam


@dataclass
class FiberReport:
    constant: bool
    representative: GroupElement | None
    witness: tuple | None  # (vertex a, vertex b) in different cosets

    def to_json(self):
        return {
            "constant": self.constant,
            "representative": self.representative.to_json() if self.representative else None,
            "witness": list(self.witness) if self.witness else None,
        }


def verify_constant_fiber(t: TilingInstance, lattice: Lattice) -> FiberReport:
    """Check that every vertex lies in one right coset of the lattice."""
    first = None
    for v, g in enumerate(t.vertices):
        rep = reduce_mod(lattice, g)[0]
        if first is None:
            first = (v, rep)
        elif rep != first[1]:
            return FiberReport(False, None, (first[0], v))
    return FiberReport(True, first[1] if first else None, None)


def project_tiling(t: TilingInstance, lattice: Lattice) -> GroupElement:
    """Common coset representative of all vertices."""
    rep = verify_constant_fiber(t, lattice)
    if not rep.constant:
        a, b = rep.witness
        raise LatticeError(f"vertices {a} and {b} lie in different cosets")
    return rep.representative


def lattice_for_shape(values) -> Lattice:
    """Lattice containing the image of a rational shape function."""
    return lattice_containing([v for v in values if not v.is_identity()])


def parse_element(group: Group, text: str, convention=None) -> GroupElement:
    """Element from comma-separated exact scalars."""
    return group.element([parse_scalar(x) for x in text.split(",")], convention)


__all__ = [
    "Lattice", "LatticeError", "FiberReport", "lattice_containing", "integer_lattice",
    "reduce_mod", "verify_constant_fiber", "project_tiling", "lattice_for_shape",
    "lie_closure_rank", "parse_element",
]
