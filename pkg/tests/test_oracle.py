from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from etrinv.formula import Fragment, Interval, evaluate
from etrinv.oracle import GridCapExceeded, GridSpec, empirical_range, generate_planted, random_formula, sample_solutions
from etrinv.parser import parse_etr


def test_sample_hyperbola():
    f, _ = parse_etr("x*y = 1")
    pts = sample_solutions(f, GridSpec.box(2, Fraction(1, 2), 2, 7))
    assert (1, 1) in pts and (2, Fraction(1, 2)) in pts and (Fraction(1, 2), 2) in pts


def test_sample_empty_and_sign():
    f, _ = parse_etr("x^2 + 1 = 0")
    assert sample_solutions(f, GridSpec.box(1, -2, 2, 9)) == []
    g, _ = parse_etr("x >= 0")
    assert sample_solutions(g, GridSpec.box(1, -1, 1, 3)) == [(0,), (1,)]


def test_grid_cap():
    with pytest.raises(GridCapExceeded):
        GridSpec.box(4, 0, 1, 100)


@given(st.integers(0, 10 ** 5))
def test_sampled_points_are_members(seed):
    node, names = random_formula(seed, n_vars=2)
    for p in sample_solutions(node, GridSpec.box(2, -1, 1, 5)):
        assert evaluate(node, p, 2)


def test_empirical_range_examples():
    one = (0, 0, 0, 0, 0, 1)
    assert empirical_range((0, 0, 0, 1, 0, Fraction(3, 4)), one, Fraction(1, 100), 5) == \
        Interval(Fraction(74, 100), Fraction(76, 100))
    assert empirical_range(one, one, Fraction(1, 2), 41) == Interval(1, 1)
    assert empirical_range((0, 1, 0, 1, 1, 1), one, Fraction(1, 10), 41) == \
        Interval(Fraction(81, 100), Fraction(121, 100))


def test_empirical_range_reports_vanishing_denominator():
    with pytest.raises(ZeroDivisionError, match="vanishes"):
        empirical_range((0, 0, 0, 0, 0, 1), (0, 0, 0, 1, 0, 0), Fraction(1, 2), 3)


@pytest.mark.parametrize("frag", [f.value for f in Fragment])
def test_planted_solutions_satisfy(frag):
    for seed in range(5):
        p = generate_planted(seed, 6, frag)
        assert p.fragment is Fragment(frag)
        assert all(evaluate(p.instance, s) for s in p.solutions)


def test_planted_ami_has_requested_size():
    p = generate_planted(5, 10, "ami")
    assert len(p.instance.constraints) == 10


def test_planted_empty_and_deterministic():
    empty = generate_planted(3, 0, "ami")
    assert empty.instance.n == 0 and empty.solutions == [()]
    assert generate_planted(9, 7, "etr").instance == generate_planted(9, 7, "etr").instance
