import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from niltile.cutproject import (
    CutProjectError,
    ModelSetSpec,
    fault_line_points,
    flc_census,
    generate,
    model_set_1d,
    model_set_points,
    neighbor_displacements,
)
from niltile.delaunay import PointSet
from niltile.nilgroup import Group
from niltile.scalar import QSqrt2, exact_sign, galois_conjugate

ONE_PLUS = QSqrt2(1, 1)
TWO_PLUS = QSqrt2(2, 1)
GAPS = {ONE_PLUS, -ONE_PLUS, TWO_PLUS, -TWO_PLUS}


def in_window(x, w=F(1, 2)):
    s = galois_conjugate(x)
    return exact_sign(s + w) >= 0 and exact_sign(w - s) >= 0


def test_origin_included():
    pts = {p.coords for p in model_set_points(ModelSetSpec.cube(4))}
    assert (0, 0, 0) in pts


def test_sqrt2_excluded_and_one_plus_sqrt2_included():
    pts = {p.coords for p in model_set_points(ModelSetSpec.cube(6))}
    assert (QSqrt2(0, 1), 0, 0) not in pts
    assert (ONE_PLUS, 0, 0) in pts


def test_star_coordinates_in_window():
    for p in model_set_points(ModelSetSpec.cube(8)):
        assert all(in_window(c) for c in p.coords)
        assert p.star == tuple(galois_conjugate(c) for c in p.coords)


def test_one_dimensional_set_is_exhaustive():
    # brute force over the coefficient box
    got = set(model_set_1d(-10, 10, F(1, 2)))
    want = set()
    for n in range(-10, 11):
        for m in range(-30, 31):
            x = QSqrt2.make(m, n)
            if exact_sign(x + 10) >= 0 and exact_sign(10 - x) >= 0 and in_window(x):
                want.add(x)
    assert got == want


def test_closed_window_boundary_is_kept():
    # with w = 1 - sqrt2 conjugate boundary hits are exact
    w = QSqrt2(-1, 1)  # sqrt2 - 1 > 0
    xs = model_set_1d(-5, 5, w)
    assert QSqrt2(-1, -1) in xs  # conjugate is -1 + sqrt2 = w exactly


def test_generate_is_a_group_subset_closed_under_conjugation_law():
    g = Group.heisenberg()
    ps = generate(ModelSetSpec.cube(8))
    rng = random.Random(1)
    for _ in range(30):
        a, b = rng.sample(ps.points, 2)
        prod = (g.element(a) * g.element(b)).coords
        # the conjugate of a product is the product of conjugates
        cp = (g.element([galois_conjugate(c) for c in a]) * g.element([galois_conjugate(c) for c in b])).coords
        assert tuple(galois_conjugate(c) for c in prod) == tuple(cp)


@pytest.mark.parametrize("axis", ["x", "y", "z"])
def test_neighbor_displacements(axis):
    ps = generate(ModelSetSpec.cube(30))
    assert neighbor_displacements(ps, axis) == GAPS


def test_neighbor_displacements_single_point_empty():
    ps = generate(ModelSetSpec(((F(-1, 10), F(1, 10)),) * 3))
    assert len(ps) == 1
    assert neighbor_displacements(ps, "x") == set()


def test_unbounded_region_rejected():
    with pytest.raises(CutProjectError):
        ModelSetSpec(((0, 1), (0, 1), (0, None)))
    with pytest.raises(CutProjectError):
        ModelSetSpec(((0, 1), (0, float("inf")), (0, 1)))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(0, 4), st.sampled_from([F(1, 4), F(1, 2), F(3, 4)]))
def test_generate_monotone(width, extra, w):
    small = {p.coords for p in model_set_points(ModelSetSpec.cube(width, w))}
    big = {p.coords for p in model_set_points(ModelSetSpec.cube(width + extra, w))}
    wider = {p.coords for p in model_set_points(ModelSetSpec.cube(width, w + F(1, 4)))}
    assert small <= big
    assert small <= wider


def test_lattice_census_single_class():
    ps = PointSet([(i, j) for i in range(-5, 6) for j in range(-5, 6)], "identity", ((-5, 5), (-5, 5)))
    rep = flc_census(ps, F(3, 2))
    assert rep.count == 1
    assert rep.centers == 49
    assert rep.min_spacing == 1.0


def test_fault_line_census_grows():
    counts = [flc_census(fault_line_points(hw, 4), 2).count for hw in (5, 10, 20)]
    assert counts[0] < counts[1] < counts[2]


def test_census_classes_are_translation_classes():
    g = Group.heisenberg()
    ps = generate(ModelSetSpec(((-6, 6), (-6, 6), (-40, 40))))
    rep = flc_census(ps, 2)
    assert rep.count >= 1
    by_class = {}
    for i, c in rep.class_of.items():
        by_class.setdefault(c, []).append(i)
    pts = set(ps.points)
    for c, members in list(by_class.items())[:5]:
        if len(members) < 2:
            continue
        i, j = members[:2]
        # left translation by p_j p_i^-1 carries the patch of i onto that of j
        t = g.element(ps.points[j]) * g.element(ps.points[i]).inverse()
        for q in rep.representatives[c]:
            image = (g.element(ps.points[i]) * g.element(q))
            assert tuple((t * image).coords) in pts


def test_census_reflexive_symmetric():
    ps = generate(ModelSetSpec(((-6, 6), (-6, 6), (-40, 40))))
    a = flc_census(ps, 2)
    b = flc_census(ps, 2)
    assert a.count == b.count and a.class_of == b.class_of
