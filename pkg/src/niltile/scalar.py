"""Exact scalars in Q and Q(sqrt 2).

Rational values are plain :class:`fractions.Fraction` objects; values with a
nonzero surd part are :class:`QSqrt2`.  Arithmetic between the two is closed
and a ``QSqrt2`` whose surd part cancels collapses back to a ``Fraction``, so
hot paths on rational data never pay for the quadratic field.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Union

__all__ = [
    "QSqrt2",
    "ExactScalar",
    "SQRT2",
    "as_exact",
    "galois_conjugate",
    "field_of",
    "parse_scalar",
    "format_scalar",
    "parse_rational",
    "is_rational",
    "exact_sign",
    "floor_exact",
    "rational_approximation",
]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class QSqrt2:
    """``a + b*sqrt(2)`` with rational ``a`` and ``b != 0``.

    Use :func:`QSqrt2.make` to build values; it returns a ``Fraction`` when
    ``b == 0``.
    """

    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = _frac(a)
        self.b = _frac(b)

    @staticmethod
    def make(a, b) -> "ExactScalar":
        b = _frac(b)
        if b == 0:
            return _frac(a)
        return QSqrt2(a, b)

    @staticmethod
    def _parts(x):
        if isinstance(x, QSqrt2):
            return x.a, x.b
        return _frac(x), Fraction(0)

    def __add__(self, other):
        try:
            a, b = QSqrt2._parts(other)
        except TypeError:
            return NotImplemented
        return QSqrt2.make(self.a + a, self.b + b)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            a, b = QSqrt2._parts(other)
        except TypeError:
            return NotImplemented
        return QSqrt2.make(self.a - a, self.b - b)

    def __rsub__(self, other):
        try:
            a, b = QSqrt2._parts(other)
        except TypeError:
            return NotImplemented
        return QSqrt2.make(a - self.a, b - self.b)

    def __mul__(self, other):
        try:
            a, b = QSqrt2._parts(other)
        except TypeError:
            return NotImplemented
        return QSqrt2.make(self.a * a + 2 * self.b * b, self.a * b + self.b * a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            a, b = QSqrt2._parts(other)
        except TypeError:
            return NotImplemented
        norm = a * a - 2 * b * b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt2)")
        # (x)(a - b sqrt2) / norm
        return QSqrt2.make(
            (self.a * a - 2 * self.b * b) / norm, (self.b * a - self.a * b) / norm
        )

    def __rtruediv__(self, other):
        try:
            a, b = QSqrt2._parts(other)
        except TypeError:
            return NotImplemented
        return QSqrt2(a, b) / self

    def __neg__(self):
        return QSqrt2(-self.a, -self.b)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if exact_sign(self) < 0 else self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return 1 / (self ** (-n))
        result: ExactScalar = Fraction(1)
        base: ExactScalar = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "QSqrt2":
        return QSqrt2(self.a, -self.b)

    def __eq__(self, other):
        if isinstance(other, QSqrt2):
            return self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return False  # normalized: b != 0
        return NotImplemented

    def __hash__(self):
        return hash(("QSqrt2", self.a, self.b))

    def _cmp(self, other) -> int:
        return exact_sign(self - other)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(2.0)

    def __repr__(self):
        return f"QSqrt2({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


ExactScalar = Union[Fraction, QSqrt2]

SQRT2 = QSqrt2(0, 1)


def as_exact(x) -> ExactScalar:
    """Coerce ints, Fractions, QSqrt2 or exact strings; floats are rejected."""
    if isinstance(x, QSqrt2):
        return x
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, Rational):
        return Fraction(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact scalar")


def is_rational(x) -> bool:
    return not isinstance(x, QSqrt2)


def field_of(x) -> str:
    return "Q(sqrt2)" if isinstance(x, QSqrt2) else "Q"


def galois_conjugate(x) -> ExactScalar:
    if isinstance(x, QSqrt2):
        return x.conjugate()
    return _frac(x)


def exact_sign(x) -> int:
    """Sign of an exact scalar, decided without floating point."""
    if isinstance(x, QSqrt2):
        a, b = x.a, x.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sa == 0:
            return sb
        if sa == sb:
            return sa
        # opposite signs: compare a^2 with 2 b^2
        d = a * a - 2 * b * b
        return sa if d > 0 else -sa
    x = _frac(x)
    return (x > 0) - (x < 0)


def floor_exact(x) -> int:
    if not isinstance(x, QSqrt2):
        return math.floor(_frac(x))
    guess = math.floor(float(x))
    # float can be off by one near integers; repair exactly
    while exact_sign(x - guess) < 0:
        guess -= 1
    while exact_sign(x - (guess + 1)) >= 0:
        guess += 1
    return guess


_RAT = r"[+-]?\d+(?:/\d+)?"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not re.fullmatch(_RAT, text):
        raise ValueError(f"not an exact rational: {text!r}")
    return Fraction(text)


def parse_scalar(text: str) -> ExactScalar:
    """Parse ``"p/q"``, ``"p/q+r/s*sqrt2"``, ``"-sqrt2"``, ``"3*sqrt2"``."""
    if not isinstance(text, str):
        raise TypeError("expected a string")
    t = text.replace(" ", "")
    if "sqrt2" not in t:
        return parse_rational(t)
    head, _, tail = t.partition("sqrt2")
    if tail:
        raise ValueError(f"malformed scalar: {text!r}")
    head = head.rstrip("*")
    # split the rational part from the surd coefficient at the last sign
    idx = max(head.rfind("+"), head.rfind("-"))
    if idx <= 0:
        a_txt, b_txt = "", head
    else:
        a_txt, b_txt = head[:idx], head[idx:]
    if b_txt in ("", "+"):
        b = Fraction(1)
    elif b_txt == "-":
        b = Fraction(-1)
    else:
        b = parse_rational(b_txt)
    a = parse_rational(a_txt) if a_txt else Fraction(0)
    return QSqrt2.make(a, b)


def _fmt_frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_scalar(x) -> str:
    x = as_exact(x)
    if not isinstance(x, QSqrt2):
        return _fmt_frac(x)
    b = x.b
    surd = ("-" if b < 0 else "+") + _fmt_frac(abs(b)) + "*sqrt2"
    if x.a == 0:
        return surd.lstrip("+")
    return _fmt_frac(x.a) + surd


def _convergents(x):
    """Continued-fraction convergents of an exact scalar (finite for rationals)."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    y = x
    while True:
        a = floor_exact(y)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        frac_part = y - a
        if exact_sign(frac_part) == 0:
            return
        y = 1 / frac_part


def rational_approximation(x, tol, max_denominator: int | None = None) -> Fraction:
    """First continued-fraction convergent within ``tol`` of ``x``.

    Rationals are returned unchanged.  ``tol`` must be a positive rational.
    Raises ValueError if ``max_denominator`` is hit before the tolerance.
    """
    x = as_exact(x)
    if not isinstance(x, QSqrt2):
        return x
    tol = _frac(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    best = None
    for c in _convergents(x):
        if max_denominator is not None and c.denominator > max_denominator:
            break
        best = c
        if exact_sign(abs(x - c) - tol) < 0:
            return c
    raise ValueError(
        f"no convergent of {format_scalar(x)} within {tol} with denominator "
        f"<= {max_denominator} (best {best})"
    )
