from fractions import Fraction

from hypothesis import given, strategies as st

from etrinv.polynomial import Polynomial, RatFunc

X, Y, Z = (Polynomial.var(i) for i in range(3))

coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polys(draw, n=3, max_terms=4):
    p = Polynomial.const(draw(coef))
    for _ in range(draw(st.integers(0, max_terms))):
        term = Polynomial.const(draw(coef))
        for _ in range(draw(st.integers(0, 3))):
            term = term * Polynomial.var(draw(st.integers(0, n - 1)))
        p = p + term
    return p


points = st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=8), min_size=3, max_size=3)


def test_canonical_form_drops_zeros():
    p = X + Y - X
    assert p == Y
    assert Polynomial({((0, 1),): Fraction(0)}).is_zero()


@given(polys())
def test_canonicalization_idempotent(p):
    assert Polynomial(p.terms) == p
    assert Polynomial(dict(p.items())) == p


@given(polys(), polys(), points)
def test_ring_operations_agree_with_evaluation(p, q, pt):
    assert (p + q).evaluate(pt) == p.evaluate(pt) + q.evaluate(pt)
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
    assert (p - q).evaluate(pt) == p.evaluate(pt) - q.evaluate(pt)


@given(polys(), st.integers(0, 3), points)
def test_power(p, e, pt):
    assert (p ** e).evaluate(pt) == p.evaluate(pt) ** e


@given(polys(), polys(), points)
def test_substitution_matches_composition(p, q, pt):
    sub = p.substitute({0: q})
    moved = [q.evaluate(pt)] + list(pt[1:])
    assert sub.evaluate(pt) == p.evaluate(moved)


def test_degree_and_single_variable():
    p = X * X * Y + 3
    assert p.degree() == 3
    assert p.variables() == {0, 1}
    assert X.as_single_variable() == 0
    assert (2 * X).as_single_variable() is None


def test_to_text_uses_names_and_fractions():
    p = X * Y * Fraction(3, 4) - 2
    assert p.to_text(["a", "b"]) == "-2 + (3/4)*a*b"


def test_ratfunc_arithmetic_and_equality():
    r = RatFunc(X + 1, X - 1)
    s = 1 / r
    assert (r * s).equals(1)
    assert RatFunc(X * 2, Polynomial.const(2)).equals(X)
    assert (r + s).evaluate([Fraction(3)]) == 2 + Fraction(1, 2)


def test_ratfunc_zero_denominator_raises():
    r = RatFunc(Polynomial.const(1), X)
    try:
        r.evaluate([Fraction(0)])
    except ZeroDivisionError:
        pass
    else:
        raise AssertionError("expected ZeroDivisionError")


@given(polys(), points)
def test_ratfunc_substitute_rational(p, pt):
    r = RatFunc(Polynomial.const(1), X * X + 1)
    out = p.substitute_rational({0: r})
    moved = [r.evaluate(pt)] + list(pt[1:])
    assert out.evaluate(pt) == p.evaluate(moved)
