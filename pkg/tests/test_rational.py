from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from etrinv.rational import (
    RationalFormatError,
    binary_length,
    floor_power_of_two,
    format_rational,
    is_dyadic,
    parse_rational,
    power_of_two_exponent,
    rational_symbols,
)

fractions = st.fractions(max_denominator=10 ** 6)


@given(fractions)
def test_format_parse_round_trip(x):
    assert parse_rational(format_rational(x)) == x


@pytest.mark.parametrize(
    "text,message",
    [("6/4", "not in lowest terms"), ("1/0", "zero denominator"), ("one", "malformed"), ("1.5", "malformed")],
)
def test_parse_rejects(text, message):
    with pytest.raises(RationalFormatError, match=message):
        parse_rational(text)


def test_integers_print_without_denominator():
    assert format_rational(Fraction(-7)) == "-7"
    assert format_rational(Fraction(3, 4)) == "3/4"


def test_dyadic_helpers():
    assert is_dyadic(Fraction(3, 64))
    assert not is_dyadic(Fraction(1, 10))
    assert power_of_two_exponent(Fraction(1, 8)) == 3
    assert power_of_two_exponent(Fraction(1)) == 0
    assert power_of_two_exponent(Fraction(3, 8)) is None
    assert floor_power_of_two(Fraction(1, 10)) == Fraction(1, 16)
    assert floor_power_of_two(Fraction(1, 8)) == Fraction(1, 8)


@given(st.fractions(min_value=Fraction(1, 10 ** 6), max_value=1))
def test_floor_power_of_two_is_tight(x):
    p = floor_power_of_two(x)
    assert p <= x < 2 * p
    assert power_of_two_exponent(p) is not None


def test_binary_length_counts_digits():
    # 4 = 100 in binary
    assert binary_length(4) == 3
    assert binary_length(0) == 1
    assert rational_symbols(Fraction(4)) == 3
