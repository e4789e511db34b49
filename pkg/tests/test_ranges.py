from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from etrinv.formula import Fragment, Instance, Interval, PlusEq, Var, VarAnnotation
from etrinv.oracle import empirical_range
from etrinv.polynomial import Polynomial
from etrinv.ranges import (
    BoundError,
    MissingAnnotation,
    bound_case_a,
    bound_rational,
    certify_instance,
    required_delta_case_b,
)

U, V = Polynomial.var(0), Polynomial.var(1)
ONE = (0, 0, 0, 0, 0, 1)

small = st.fractions(min_value=-3, max_value=3, max_denominator=4)
deltas = st.sampled_from([Fraction(1, 4), Fraction(1, 16), Fraction(1, 256), Fraction(1, 10)])


def test_constant_function():
    assert bound_rational(ONE, ONE, Fraction(1, 3)) == Interval(1, 1)


def test_linear_example_case_a():
    a = (0, 0, 0, 1, 0, Fraction(3, 4))
    assert bound_case_a(a, Fraction(1, 100), 1) == Interval(Fraction(7, 10), Fraction(4, 5))
    assert bound_rational(a, ONE, Fraction(1, 100)).within(Interval(Fraction(7, 10), Fraction(4, 5)))


def test_product_example():
    a = (0, 1, 0, 1, 1, 1)
    bound = bound_rational(a, ONE, Fraction(1, 10))
    assert bound == Interval(Fraction(7, 10), Fraction(13, 10))
    assert empirical_range(a, ONE, Fraction(1, 10), 41) == Interval(Fraction(81, 100), Fraction(121, 100))


def test_bound_errors():
    with pytest.raises(BoundError):
        bound_rational(ONE, (0, 0, 0, 0, 0, 0), Fraction(1, 2))
    with pytest.raises(BoundError):
        bound_rational(ONE, (0, 0, 0, 4, 0, 1), Fraction(1, 2))
    with pytest.raises(BoundError):
        bound_rational(ONE, ONE, Fraction(3, 2))


def test_negative_numerator_is_still_sound():
    # p = -1 + x, q = 1 + x on [-1/2, 1/2]: the range includes -3
    a, b, d = (0, 0, 0, 1, 0, -1), (0, 0, 0, 1, 0, 1), Fraction(1, 2)
    bound = bound_rational(a, b, d)
    assert empirical_range(a, b, d, 9).within(bound)
    assert bound.lo <= -3


@given(st.lists(small, min_size=6, max_size=6), st.lists(small, min_size=5, max_size=5),
       st.integers(1, 4), deltas)
def test_sound_against_grid(a, b5, b6, delta):
    b = b5 + [Fraction(b6)]
    assume(sum(abs(x) for x in b5) * delta < b6)
    assert empirical_range(a, b, delta, 9).within(bound_rational(a, b, delta))


@given(st.lists(st.fractions(min_value=0, max_value=2, max_denominator=4), min_size=5, max_size=5),
       small, deltas)
def test_case_a_consistency(a5, a6, delta):
    a = a5 + [a6]
    assert bound_rational(a, ONE, delta).within(bound_case_a(a, delta, 2))


@given(st.lists(st.integers(-15, 15), min_size=5, max_size=5),
       st.lists(st.integers(-15, 15), min_size=5, max_size=5),
       st.integers(0, 6), st.integers(1, 9), st.sampled_from([Fraction(1, 7), Fraction(1, 8), Fraction(1, 2)]))
def test_case_b_consistency(a5, b5, a6, b6, eps):
    delta = required_delta_case_b(eps, 15, a6, b6)
    bound = bound_rational(a5 + [a6], b5 + [b6], delta)
    c = Fraction(a6, b6)
    assert bound.within(Interval(c - eps, c + eps))


@given(st.lists(small, min_size=6, max_size=6), st.integers(1, 4))
def test_monotone_in_delta(a, b6):
    b = [0, 0, 0, 0, 0, b6]
    inner = bound_rational(a, b, Fraction(1, 16))
    outer = bound_rational(a, b, Fraction(1, 4))
    assert inner.within(outer)


def test_required_delta_examples():
    assert required_delta_case_b(1, 1, 0, 1) == Fraction(1, 10)
    assert required_delta_case_b(2, 1, 0, 1) > required_delta_case_b(1, 1, 0, 1)
    d2 = Fraction(1, 7)
    assert required_delta_case_b(d2, 15, 3, 2) == d2 * 4 / (75 * (3 + (1 + d2) * 2))
    with pytest.raises(BoundError):
        required_delta_case_b(0, 1, 0, 1)


def shift_instance(width):
    d1 = Fraction(1, 100)
    d2 = 5 * d1
    ann = VarAnnotation.from_polys((0,), U + Fraction(3, 4))
    vs = (
        Var("r", Interval(1 - d2, 1 + d2), VarAnnotation.from_polys((0,), U + 1)),
        Var("h", Interval(Fraction(3, 4) - width / 2, Fraction(3, 4) + width / 2), ann),
        Var("k", Interval(1 - d2, 1 + d2), VarAnnotation((), ONE)),
    )
    return Instance(Fragment.SHIFT, vs, (PlusEq(1, 1, 2),), None, d2, d1)


def test_certify_passes_and_reports_constant():
    report = certify_instance(shift_instance(Fraction(1, 10)))
    assert report.ok
    const = report.variables[2]
    assert const.certified == Interval(1, 1)


def test_certify_narrowed_interval_fails():
    report = certify_instance(shift_instance(Fraction(1, 100)))
    assert not report.ok
    assert [v.name for v in report.failures] == ["h"]
    assert report.to_json()["pass"] is False


def test_certify_requires_annotations():
    inst = Instance(Fragment.SHIFT, (Var("x", Interval(Fraction(9, 10), Fraction(11, 10))),), (), None,
                    Fraction(1, 10), Fraction(1, 50))
    with pytest.raises(MissingAnnotation):
        certify_instance(inst)
