import math
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import qsqrt2_values, small_fractions
from niltile.scalar import (
    SQRT2,
    QSqrt2,
    exact_sign,
    field_of,
    floor_exact,
    format_scalar,
    galois_conjugate,
    parse_scalar,
    rational_approximation,
)


@given(qsqrt2_values())
def test_conjugation_is_involution(x):
    assert galois_conjugate(galois_conjugate(x)) == x


@given(qsqrt2_values(), qsqrt2_values())
def test_conjugation_is_ring_hom(x, y):
    assert galois_conjugate(x * y) == galois_conjugate(x) * galois_conjugate(y)
    assert galois_conjugate(x + y) == galois_conjugate(x) + galois_conjugate(y)


@given(qsqrt2_values())
def test_sign_matches_float(x):
    f = float(x)
    if abs(f) > 1e-9:
        assert exact_sign(x) == (1 if f > 0 else -1)


@given(qsqrt2_values(), qsqrt2_values())
def test_division_inverts_multiplication(x, y):
    if y != 0:
        assert (x / y) * y == x


@given(qsqrt2_values())
def test_text_round_trip(x):
    assert parse_scalar(format_scalar(x)) == x


@given(qsqrt2_values())
def test_floor_is_exact(x):
    k = floor_exact(x)
    assert exact_sign(x - k) >= 0 and exact_sign(x - (k + 1)) < 0


def test_collapse_to_fraction():
    assert SQRT2 * SQRT2 == 2
    assert isinstance(SQRT2 * SQRT2, Fraction)
    assert field_of(SQRT2 - SQRT2) == "Q"
    assert field_of(1 + SQRT2) == "Q(sqrt2)"


def test_parse_forms():
    assert parse_scalar("3/4") == Fraction(3, 4)
    assert parse_scalar("-sqrt2") == -SQRT2
    assert parse_scalar("1-1/2*sqrt2") == QSqrt2(1, Fraction(-1, 2))
    assert parse_scalar("3*sqrt2") == QSqrt2(0, 3)
    with pytest.raises(ValueError):
        parse_scalar("0.5")


def test_mixed_comparisons():
    assert Fraction(7, 5) < SQRT2 < Fraction(3, 2)
    assert SQRT2 > 1 and 1 < SQRT2
    assert abs(1 - SQRT2) == SQRT2 - 1


def test_sqrt2_convergent_within_tolerance():
    tol = Fraction(1, 10**5)
    c = rational_approximation(SQRT2, tol)
    # continued fraction of sqrt2 is [1; 2, 2, ...]; convergents p/q satisfy p^2 - 2q^2 = +-1
    assert abs(c.numerator ** 2 - 2 * c.denominator ** 2) == 1
    assert abs(float(c) - math.sqrt(2)) < 1e-5
    assert c == Fraction(577, 408)


def test_rational_is_fixed_point():
    assert rational_approximation(Fraction(3, 7), Fraction(1, 100)) == Fraction(3, 7)


def test_denominator_cap_reported():
    with pytest.raises(ValueError):
        rational_approximation(SQRT2, Fraction(1, 10**9), max_denominator=100)
