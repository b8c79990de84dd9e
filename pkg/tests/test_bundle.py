import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from niltile.bundle import (
    LatticeError,
    Lattice,
    integer_lattice,
    lattice_containing,
    lattice_for_shape,
    project_tiling,
    reduce_mod,
    verify_constant_fiber,
)
from niltile.complex import TilingInstance, gahler_complex
from niltile.corpus import corpus_tilings, periodic_heisenberg
from niltile.nilgroup import Group
from niltile.scalar import SQRT2
from niltile.shape import deform, extract_shape, rationalize

from conftest import fraction_triples

H = Group.heisenberg()
R2 = Group.euclidean(2)


def test_integer_heisenberg_lattice():
    lat = integer_lattice(H)
    assert lat.moduli == [1, 1, 1]
    assert lat.contains(H.element([3, -2, 7]))
    assert not lat.contains(H.element([0, 0, F(1, 2)]))


def test_half_generators_give_quarter_center():
    gens = [H.element([F(1, 2), 0, 0]), H.element([0, F(1, 2), 0])]
    lat = lattice_containing(gens)
    target = [H.element([F(1, 2), 0, 0]), H.element([0, F(1, 2), 0]), H.element([0, 0, F(1, 4)])]
    # two-sided: our basis lies in the target lattice and the target generators lie in ours
    other = lattice_containing(target)
    assert all(lat.contains(g) for g in target)
    assert all(other.contains(b) for b in lat.basis)
    assert not lat.contains(H.element([0, 0, F(1, 8)]))


def test_plane_unit_vectors():
    lat = lattice_containing([R2.element([1, 0]), R2.element([0, 1])])
    assert lat.moduli == [1, 1]


def test_non_generating_set_rejected():
    with pytest.raises(LatticeError):
        lattice_containing([H.element([1, 0, 0]), H.element([0, 0, 1])])
    with pytest.raises(LatticeError):
        lattice_containing([H.element([SQRT2, 0, 0]), H.element([0, 1, 0])])


def test_reduce_plane_example():
    rep, lam = reduce_mod(integer_lattice(R2), R2.element([F(3, 2), F(-1, 4)]))
    assert rep.coords == (F(1, 2), F(3, 4))
    assert lam.coords == (1, -1)


def test_reduce_heisenberg_example():
    lat = integer_lattice(H)
    g = H.element([F(3, 2), 0, F(5, 4)])
    rep, lam = reduce_mod(lat, g)
    assert all(0 <= c < 1 for c in rep.coords)
    assert rep * lam == g and lat.contains(lam)


def test_reduce_lattice_element_gives_identity():
    lat = integer_lattice(H)
    g = H.element([2, -3, 5])
    rep, lam = reduce_mod(lat, g)
    assert rep.is_identity() and lam == g


def test_membership_of_random_words():
    gens = [H.element([F(1, 2), F(1, 3), 0]), H.element([0, F(2, 5), F(1, 7)]), H.element([1, 0, 1])]
    lat = lattice_containing(gens)
    rng = random.Random(3)
    for _ in range(200):
        g = H.identity()
        for _ in range(rng.randint(1, 6)):
            s = rng.choice(gens)
            g = g * (s if rng.random() < 0.5 else s.inverse())
        assert lat.contains(g)


@settings(max_examples=60, deadline=None)
@given(fraction_triples())
def test_reduction_is_a_retraction(c):
    lat = lattice_containing([H.element([F(1, 2), 0, 0]), H.element([0, F(2, 3), 0])])
    g = H.element(list(c))
    rep, lam = reduce_mod(lat, g)
    assert rep * lam == g and lat.contains(lam)
    assert reduce_mod(lat, rep)[0] == rep
    assert reduce_mod(lat, g * lat.basis[1] * lat.basis[2])[0] == rep


def test_lattice_json_round_trip():
    lat = lattice_containing([H.element([F(1, 2), 0, 0]), H.element([0, F(1, 2), 0])])
    back = Lattice.from_json(lat.to_json())
    assert back.basis == lat.basis and back.moduli == lat.moduli


def test_projection_of_periodic_and_translated():
    t = periodic_heisenberg()
    lat = integer_lattice(H)
    assert project_tiling(t, lat).is_identity()
    g = H.element([F(1, 3), F(1, 5), F(1, 7)])
    moved = TilingInstance(H, [g * v for v in t.vertices], t.cell_vertices[1:], t.cell_boundaries[1:],
                           t.labels)
    assert project_tiling(moved, lat) == reduce_mod(lat, g)[0]


def test_nudged_vertex_gives_witness():
    t = periodic_heisenberg()
    verts = list(t.vertices)
    verts[5] = verts[5] * H.element([0, 0, F(1, 10)])
    bad = TilingInstance(H, verts, t.cell_vertices[1:], t.cell_boundaries[1:], t.labels)
    rep = verify_constant_fiber(bad, integer_lattice(H))
    assert not rep.constant and 5 in rep.witness
    with pytest.raises(LatticeError):
        project_tiling(bad, integer_lattice(H))


def _pipeline(t, rho):
    cx, proj = gahler_complex(t, 1)
    s = extract_shape(t, (cx, proj))
    sq, _ = rationalize(s, cx, rho)
    res = deform(t, sq, rho, gamma=(cx, proj))
    lat = lattice_for_shape(sq.values)
    return verify_constant_fiber(res.tiling, lat)


@pytest.mark.parametrize("name", sorted(corpus_tilings()))
def test_fiber_bundle_pipeline_on_corpus(name):
    t = corpus_tilings()[name]
    assert _pipeline(t, F(1, 10)).constant
