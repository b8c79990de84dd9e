import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fraction_triples, qsqrt2_values, small_fractions
from niltile.nilgroup import (
    CANONICAL,
    POLARIZED,
    Group,
    StructureConstants,
    StructureError,
    bch,
    bch_multiply,
    commutator,
    lie_bracket,
    proxy_distance,
    proxy_distance_below,
)

H = Group.heisenberg()
R2 = Group.euclidean(2)

# strictly upper triangular 4x4 matrices: E12, E23, E34, E13, E24, E14
N4 = StructureConstants(6, {(0, 1): {3: 1}, (1, 2): {4: 1}, (0, 4): {5: 1}, (3, 2): {5: 1}})
N4_UNITS = [(0, 1), (1, 2), (2, 3), (0, 2), (1, 3), (0, 3)]


# -- independent matrix oracle ---------------------------------------------

def _mat(coords, size=4):
    m = [[Fraction(0)] * size for _ in range(size)]
    for c, (i, j) in zip(coords, N4_UNITS):
        m[i][j] = Fraction(c)
    return m


def _mm(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _add(a, b, s=1):
    return [[x + s * y for x, y in zip(r, q)] for r, q in zip(a, b)]


def _scale(a, s):
    return [[x * s for x in r] for r in a]


def _eye(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _exp(a):
    n = len(a)
    out, term = _eye(n), _eye(n)
    for k in range(1, n):
        term = _scale(_mm(term, a), Fraction(1, k))
        out = _add(out, term)
    return out


def _log(m):
    n = len(m)
    a = _add(m, _eye(n), -1)
    out, power = _scale(a, 0), _eye(n)
    for k in range(1, n):
        power = _mm(power, a)
        out = _add(out, _scale(power, Fraction((-1) ** (k + 1), k)))
    return out


def _oracle_bch(x, y):
    z = _log(_mm(_exp(_mat(x)), _exp(_mat(y))))
    return [z[i][j] for i, j in N4_UNITS]


# -- brackets -------------------------------------------------------------

def test_heisenberg_bracket():
    x, y, z = [1, 0, 0], [0, 1, 0], [0, 0, 1]
    assert lie_bracket(x, y, H.sc) == [0, 0, 1]
    assert lie_bracket(x, x, H.sc) == [0, 0, 0]
    assert lie_bracket(y, x, H.sc) == [0, 0, -1]
    assert lie_bracket(x, z, H.sc) == [0, 0, 0]


def test_bracket_dimension_mismatch():
    with pytest.raises(ValueError):
        lie_bracket([1, 0], [0, 1, 0], H.sc)


def test_rejects_bad_structure():
    # sl2 is not nilpotent
    with pytest.raises(StructureError):
        StructureConstants(3, {(0, 1): {2: 1}, (2, 0): {0: 2}, (2, 1): {1: -2}})
    with pytest.raises(StructureError):
        StructureConstants(2, {(0, 1): {0: 1}})  # [X, Y] = X: solvable, not nilpotent


def test_step_and_weights():
    assert H.sc.step == 2 and H.sc.weights == (1, 1, 2)
    assert N4.step == 3 and N4.weights == (1, 1, 1, 2, 2, 3)
    assert Group.euclidean(3).sc.step == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(small_fractions, min_size=6, max_size=6),
       st.lists(small_fractions, min_size=6, max_size=6))
def test_bch_matches_matrix_oracle(x, y):
    assert bch(x, y, N4) == _oracle_bch(x, y)


def test_bch_heisenberg_against_3x3_matrices():
    rng = random.Random(3)
    for _ in range(50):
        x = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3)]
        y = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3)]
        # embed the Heisenberg algebra as E12, E23, E13 in 3x3 matrices
        def m3(v):
            return [[0, v[0], v[2]], [0, 0, v[1]], [0, 0, 0]]
        def exp3(a):
            return _add(_add(_eye(3), [[Fraction(c) for c in r] for r in a]),
                        _scale([[Fraction(c) for c in r] for r in _mm(a, a)], Fraction(1, 2)))
        prod = _mm(exp3(m3(x)), exp3(m3(y)))
        z = _log(prod)
        assert bch(x, y, H.sc) == [z[0][1], z[1][2], z[0][2]]


# -- group law ------------------------------------------------------------

def test_polarized_examples():
    a, b = H.element([1, 0, 0]), H.element([0, 1, 0])
    assert (a * b).coords == (1, 1, 1)
    assert H.element([1, 1, 1]).inverse().coords == (-1, -1, 0)
    assert commutator(a, b).coords == (0, 0, 1)
    assert commutator(a, a).is_identity()


def test_canonical_examples():
    hc = Group.heisenberg(CANONICAL)
    a, b = hc.element([1, 0, 0]), hc.element([0, 1, 0])
    assert bch_multiply(a, b).coords == (1, 1, Fraction(1, 2))
    g = hc.element([1, 1, Fraction(1, 2)])
    assert g.inverse().coords == (-1, -1, Fraction(-1, 2))


def test_identity_is_zero_in_both_conventions():
    assert H.identity().coords == (0, 0, 0)
    assert H.identity(CANONICAL).coords == (0, 0, 0)
    assert H.identity(POLARIZED) == H.identity(CANONICAL)


@settings(max_examples=200)
@given(fraction_triples(), fraction_triples(), fraction_triples())
def test_polarized_associativity_and_closed_form(p, q, r):
    g, h, k = H.element(p), H.element(q), H.element(r)
    assert (g * h) * k == g * (h * k)
    x, y, z = p
    x2, y2, z2 = q
    assert (g * h).coords == (x + x2, y + y2, z + x * y2 + z2)
    assert bch_multiply(g, h) == g * h
    assert bch_multiply(g, h).coords == (g * h).coords


@given(fraction_triples())
def test_inverse_and_round_trip(p):
    g = H.element(p)
    assert (g * g.inverse()).is_identity()
    assert (g.inverse() * g).is_identity()
    assert g.to_canonical().to_polarized().coords == g.coords
    assert g.to_canonical().coords[2] == p[2] - p[0] * p[1] / 2


@settings(max_examples=50, deadline=None)
@given(fraction_triples(), fraction_triples(), fraction_triples())
def test_two_step_nilpotency(p, q, r):
    g, h, k = H.element(p), H.element(q), H.element(r)
    assert commutator(commutator(g, h), k).is_identity()


@given(st.tuples(small_fractions, small_fractions), st.tuples(small_fractions, small_fractions))
def test_abelian_commutator_trivial(p, q):
    assert commutator(R2.element(p), R2.element(q)).is_identity()


@given(st.tuples(qsqrt2_values(), qsqrt2_values(), qsqrt2_values()),
       st.tuples(qsqrt2_values(), qsqrt2_values(), qsqrt2_values()))
def test_galois_conjugation_commutes_with_law(p, q):
    g, h = H.element(p), H.element(q)
    assert (g * h).conjugate() == g.conjugate() * h.conjugate()


# -- distance proxy -------------------------------------------------------

@given(fraction_triples(), fraction_triples(), fraction_triples())
def test_proxy_distance_left_invariant_and_symmetric(a, p, q):
    a, g, h = H.element(a), H.element(p), H.element(q)
    assert proxy_distance(a * g, a * h) == proxy_distance(g, h)
    assert proxy_distance(g, h) == proxy_distance(h, g)
    assert (proxy_distance(g, h) == 0) == (g == h)


def test_proxy_distance_values():
    assert proxy_distance(R2.element([0, 0]), R2.element([3, 4])) == 5.0
    assert proxy_distance(H.identity(), H.element([0, 0, 4])) == 2.0
    assert proxy_distance_below(H.identity(), H.element([0, 0, Fraction(1, 4)]), Fraction(1, 2)) is False
    assert proxy_distance_below(H.identity(), H.element([0, 0, Fraction(1, 5)]), Fraction(1, 2)) is True
