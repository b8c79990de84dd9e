"""Fixture tilings used by the tests, the acceptance suite and the CLI."""
from __future__ import annotations

from fractions import Fraction

from .complex import (
    CellComplex,
    heisenberg_cube_tiling,
    interval_tiling,
    square_tiling,
    strip_tiling,
)
from .nilgroup import Group
from .scalar import SQRT2


def periodic_square(n: int = 6, triangulated: bool = True):
    return square_tiling(n, n, triangulated=triangulated)


def periodic_interval(n: int = 8):
    return interval_tiling(n, (1,), name="interval")


def two_length_interval(n: int = 10):
    """Alternating intervals of lengths 1 and sqrt2 (periodic, irrational shape)."""
    return interval_tiling(n, (1, SQRT2), name="interval-1-sqrt2")


def irrational_strip(ncols: int = 8, nrows: int = 5):
    """Columns of width 1 and sqrt2."""
    return strip_tiling(ncols, nrows, (1, SQRT2), name="strip-1-sqrt2")


def skewed_square(n: int = 6):
    """Triangulated square lattice sheared by an irrational basis."""
    return square_tiling(n, n, triangulated=True, basis=((1, 0), (Fraction(1, 3), SQRT2)),
                         name="square-skewed-sqrt2")


def periodic_heisenberg(nx: int = 5, nz: int = 9):
    return heisenberg_cube_tiling(nx, nx, nz)


def irrational_heisenberg(nx: int = 5, nz: int = 9):
    """Heisenberg cubes built on the generators (sqrt2,0,0), (0,1,0), (0,0,sqrt2)."""
    H = Group.heisenberg()
    gens = [H.element([SQRT2, 0, 0]), H.element([0, 1, 0]), H.element([0, 0, SQRT2])]
    return heisenberg_cube_tiling(nx, nx, nz, generators=gens, name="heisenberg-sqrt2")


CORPUS = {
    "interval": periodic_interval,
    "interval-1-sqrt2": two_length_interval,
    "square-triangulated": periodic_square,
    "square-skewed-sqrt2": skewed_square,
    "strip-1-sqrt2": irrational_strip,
    "heisenberg": periodic_heisenberg,
    "heisenberg-sqrt2": irrational_heisenberg,
}


def corpus_tilings():
    return {name: make() for name, make in CORPUS.items()}


# -- small CW complexes ------------------------------------------------------


def circle_complex() -> CellComplex:
    return CellComplex([[[]], [[(0, 1), (0, -1)]]])


def torus_complex() -> CellComplex:
    """One vertex, edges a and b, one square with boundary a b a^-1 b^-1."""
    loop = [(0, 1), (0, -1)]
    return CellComplex([[[]], [loop, list(loop)], [[(0, 1), (1, 1), (0, -1), (1, -1)]]])


def klein_bottle_complex() -> CellComplex:
    """One vertex, edges a and b, one square with boundary a b a^-1 b."""
    loop = [(0, 1), (0, -1)]
    return CellComplex([[[]], [loop, list(loop)], [[(0, 1), (1, 1), (0, -1), (1, 1)]]])


def point_complex(dim: int) -> CellComplex:
    return CellComplex([[[]]] + [[] for _ in range(dim)])
