"""Exact rational helpers: canonical string form, dyadic checks, bit counts."""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import Union

Q = Fraction
RationalLike = Union[int, Fraction, str]

_RATIONAL_RE = re.compile(r"^(-?)(\d+)(?:/(\d+))?$")


class RationalFormatError(ValueError):
    pass


def q(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction (no canonical check)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def parse_rational(text: str) -> Fraction:
    """Parse a canonical rational string ("p" or "p/q" in lowest terms, q > 1)."""
    m = _RATIONAL_RE.match(text.strip()) if isinstance(text, str) else None
    if m is None:
        raise RationalFormatError(f"malformed rational string {text!r}")
    sign, num, den = m.groups()
    if len(num) > 1 and num.startswith("0"):
        raise RationalFormatError(f"malformed rational string {text!r}")
    n = int(num)
    if den is None:
        if sign and n == 0:
            raise RationalFormatError(f"rational {text!r} not in lowest terms")
        return Fraction(-n if sign else n)
    d = int(den)
    if d == 0:
        raise RationalFormatError(f"zero denominator in {text!r}")
    if d == 1 or gcd(n, d) != 1:
        raise RationalFormatError(f"rational {text!r} not in lowest terms")
    return Fraction(-n if sign else n, d)


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def is_dyadic(value: Fraction) -> bool:
    d = Fraction(value).denominator
    return d & (d - 1) == 0


def power_of_two_exponent(value: Fraction) -> int | None:
    """Return l with value == 2**-l (l >= 0), or None."""
    value = Fraction(value)
    if value.numerator != 1 or not is_dyadic(value):
        return None
    return value.denominator.bit_length() - 1


def floor_power_of_two(value: Fraction) -> Fraction:
    """Largest 2**-l (l >= 0) not exceeding value, for 0 < value <= 1."""
    value = Fraction(value)
    if not 0 < value <= 1:
        raise ValueError("expected 0 < value <= 1")
    l = 0
    while Fraction(1, 2 ** l) > value:
        l += 1
    return Fraction(1, 2 ** l)


def binary_length(n: int) -> int:
    """Number of binary digits of |n|; zero is written with one digit."""
    return max(1, abs(n).bit_length())


def rational_symbols(value: Fraction) -> int:
    """Symbol count of a nonnegative constant: binary digits, plus '/' and the denominator."""
    value = abs(Fraction(value))
    if value.denominator == 1:
        return binary_length(value.numerator)
    return binary_length(value.numerator) + 1 + binary_length(value.denominator)
