"""Exact tilings of Euclidean space and the Heisenberg group."""

from .bundle import Lattice, lattice_containing, lattice_for_shape, verify_constant_fiber
from .cohomology import cohomology, smith_normal_form
from .complex import CellComplex, TilingInstance, gahler_complex, tiling_distance
from .cutproject import ModelSetSpec, flc_census, generate, neighbor_displacements
from .delaunay import MeshParams, PointSet, delaunay_complex, perturb_until_generic
from .nilgroup import Group, GroupElement
from .scalar import QSqrt2
from .shape import ShapeFunction, deform, extract_shape, rationalize, verify_cocycle

__version__ = "0.1.0"

__all__ = [
    "CellComplex", "Group", "GroupElement", "Lattice", "MeshParams", "ModelSetSpec", "PointSet",
    "QSqrt2", "ShapeFunction", "TilingInstance", "cohomology", "deform", "delaunay_complex",
    "extract_shape", "flc_census", "gahler_complex", "generate", "lattice_containing",
    "lattice_for_shape", "neighbor_displacements", "perturb_until_generic", "rationalize",
    "smith_normal_form", "tiling_distance", "verify_cocycle", "verify_constant_fiber",
]
