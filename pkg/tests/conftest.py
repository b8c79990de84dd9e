from fractions import Fraction

from hypothesis import strategies as st

small_fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def fraction_triples():
    return st.tuples(small_fractions, small_fractions, small_fractions)


def qsqrt2_values():
    from niltile.scalar import QSqrt2
    return st.builds(QSqrt2.make, small_fractions, small_fractions)
