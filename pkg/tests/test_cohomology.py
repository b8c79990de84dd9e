import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from niltile import corpus
from niltile.cohomology import (
    CohomologyError,
    cohomology,
    is_isomorphism,
    pullback_map,
    smith_normal_form,
    verify_smith,
)
from niltile.complex import CellComplex, forgetful_chain_maps, gahler_complex, square_tiling


def test_snf_small_examples():
    assert smith_normal_form([[0, 0], [0, 0]]).diagonal == [0, 0]
    assert smith_normal_form([[1, 0], [0, 1]]).diagonal == [1, 1]
    a = [[2, 4], [6, 8]]
    snf = smith_normal_form(a)
    assert snf.diagonal == [2, 4]
    assert verify_smith(a, snf)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_snf_recomposition(n, m, data):
    a = [[data.draw(st.integers(-9, 9)) for _ in range(m)] for _ in range(n)]
    assert verify_smith(a, smith_normal_form(a))


def test_circle_torus_klein():
    c = cohomology(corpus.circle_complex())
    assert c.ranks == [1, 1] and c.torsion == [[], []]
    t = cohomology(corpus.torus_complex())
    assert t.ranks == [1, 2, 1] and all(x == [] for x in t.torsion)
    k = cohomology(corpus.klein_bottle_complex())
    assert k.ranks == [1, 1, 0] and k.torsion[2] == [2]
    assert cohomology(corpus.klein_bottle_complex(), "R").ranks == [1, 1, 0]


def test_rejects_bad_boundary():
    bad = CellComplex([[[], []], [[(1, 1), (0, -1)]], [[(0, 1)]]])
    with pytest.raises(CohomologyError):
        cohomology(bad)


def test_periodic_tilings():
    sq = cohomology(gahler_complex(square_tiling(6, 6), 1)[0])
    assert sq.ranks == [1, 2, 1]
    h = cohomology(gahler_complex(corpus.periodic_heisenberg(), 1)[0])
    assert h.ranks == [1, 2, 2, 1]
    assert all(t == [] for t in h.torsion)


def test_universal_coefficients_on_corpus():
    for name, t in corpus.corpus_tilings().items():
        cx = gahler_complex(t, 1)[0]
        z, r = cohomology(cx, "Z"), cohomology(cx, "R")
        assert z.ranks == r.ranks, name
        assert sum((-1) ** k * b for k, b in enumerate(z.ranks)) == cx.euler_characteristic()


def test_identity_pullback():
    cx = gahler_complex(square_tiling(6, 6), 1)[0]
    ident = [[[int(i == j) for j in range(n)] for i in range(n)] for n in cx.counts]
    mats = pullback_map(cx, cx, ident)
    assert mats == [[[1]], [[1, 0], [0, 1]], [[1]]]


def test_forgetful_map_is_isomorphism():
    src, dst, maps = forgetful_chain_maps(square_tiling(8, 8), 2)
    mats = pullback_map(src, dst, maps)
    assert is_isomorphism(mats)
    assert [len(m) for m in mats] == [1, 2, 1]


def test_constant_map_kills_positive_degrees():
    src = corpus.torus_complex()
    pt = corpus.point_complex(2)
    maps = [[[1]], [], []]
    mats = pullback_map(src, pt, maps)
    assert mats[0] == [[1]]
    assert all(all(x == 0 for row in m for x in row) for m in mats[1:])


def test_non_chain_map_rejected():
    segment = CellComplex([[[], []], [[(1, 1), (0, -1)]]])
    circle = corpus.circle_complex()
    # the edge goes onto the loop but only one endpoint goes to the vertex
    with pytest.raises(CohomologyError):
        pullback_map(segment, circle, [[[1, 0]], [[1]]])
    pullback_map(segment, circle, [[[1, 1]], [[1]]])


def test_pe_cohomology_periodic():
    from niltile.cohomology import pe_cohomology_periodic
    g, rep = pe_cohomology_periodic(square_tiling(8, 8), 1)
    assert g.ranks == [1, 2, 1]
    g, _ = pe_cohomology_periodic(corpus.periodic_interval(10), 1)
    assert g.ranks == [1, 1]


def test_pe_cohomology_rejects_aperiodic_looking_input():
    from fractions import Fraction
    from niltile.cohomology import pe_cohomology_periodic
    from niltile.complex import interval_tiling
    # a single long interval among unit ones: classes change with the level
    t = interval_tiling(14, (1,) * 6 + (Fraction(3, 2),) + (1,) * 7)
    with pytest.raises(CohomologyError):
        pe_cohomology_periodic(t, 1)
