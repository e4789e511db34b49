from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from etrinv.formula import (
    Atom,
    AtomKind,
    Conj,
    Disj,
    EqOne,
    Fragment,
    GeqZero,
    Instance,
    Interval,
    InvEq,
    Neg,
    PlusEq,
    SquareEq,
    TimesEq,
    TowerBudgetError,
    TowerValue,
    Var,
    VarAnnotation,
    evaluate,
    failing_constraints,
    formula_length,
    tower_expand,
    validate_fragment,
)
from etrinv.parser import parse_etr
from etrinv.polynomial import Polynomial

X, Y, Z = (Polynomial.var(i) for i in range(3))


def ranged(fragment, intervals, constraints, delta):
    vs = tuple(Var(f"v{i}", Interval(*iv)) for i, iv in enumerate(intervals))
    return Instance(fragment, vs, tuple(constraints), None, Fraction(delta))


def test_ami_instance_is_valid():
    inst = Instance(Fragment.AMI, tuple(Var(n) for n in "xyz"), (PlusEq(0, 1, 2), EqOne(0)))
    assert validate_fragment(inst) == []


def test_shift_multiplication_operand_off_center():
    d = Fraction(1, 10)
    inst = ranged(Fragment.SHIFT, [(Fraction(3, 2) - d, Fraction(3, 2) + d), (1 - d, 1 + d), (1 - d, 1 + d)],
                  [TimesEq(0, 1, 2)], d)
    messages = [v.message for v in validate_fragment(inst)]
    assert "multiplication operand interval outside [1−δ,1+δ]" in messages


def test_inv_rejects_squaring():
    d = Fraction(1, 10)
    inst = ranged(Fragment.INV, [(1 - d, 1 + d)] * 2, [SquareEq(0, 1)], d)
    assert [v.message for v in validate_fragment(inst)] == ["illegal constraint tag for fragment"]


def test_interval_width_and_range_checks():
    inst = ranged(Fragment.SQUARE, [(Fraction(1, 2), 2), (Fraction(1, 4), Fraction(1, 2))], [], Fraction(1, 4))
    messages = {v.message for v in validate_fragment(inst)}
    assert messages == {"interval width exceeds 2δ", "interval outside [1/2,2]"}


@given(st.lists(st.sampled_from(["plus", "times", "geq0", "eq1", "square", "inv"]), max_size=8), st.data())
def test_validation_monotone_under_removal(kinds, data):
    make = {"plus": PlusEq(0, 1, 2), "times": TimesEq(0, 1, 2), "geq0": GeqZero(0), "eq1": EqOne(1),
            "square": SquareEq(0, 1), "inv": InvEq(0, 1)}
    cons = [make[k] for k in kinds]
    inst = Instance(Fragment.AMI, tuple(Var(n) for n in "xyz"), tuple(cons))
    full = len(validate_fragment(inst))
    if cons:
        i = data.draw(st.integers(0, len(cons) - 1))
        smaller = Instance(Fragment.AMI, inst.vars, tuple(cons[:i] + cons[i + 1:]))
        assert len(validate_fragment(smaller)) <= full


def test_formula_length_convention():
    node, _ = parse_etr("x + y - z = 0")
    assert formula_length(node) == 8
    assert formula_length(Conj(())) == 0
    # the coefficient 4 = 100 in binary costs three symbols
    assert formula_length(Atom(AtomKind.EQ, 4 * X)) - formula_length(Atom(AtomKind.EQ, X)) == 4


def test_formula_length_additive_over_conjunction():
    a, _ = parse_etr("x*y = 1")
    b, _ = parse_etr("x >= 0")
    assert formula_length(Conj((a, b))) == formula_length(a) + formula_length(b) + 1


def test_evaluate_examples(torus_text):
    f, _ = parse_etr("x*y = 1")
    assert evaluate(f, [2, Fraction(1, 2)], 2)
    g, _ = parse_etr("x >= 0")
    assert not evaluate(g, [Fraction(-1, 3)], 1)
    torus, names = parse_etr(torus_text)
    assert evaluate(torus, [6, 0, 0], 3)


def test_evaluate_arity_mismatch():
    f, _ = parse_etr("x*y = 1")
    with pytest.raises(ValueError):
        evaluate(f, [1], 2)


atoms = st.builds(
    lambda k, c: Atom(k, X - c),
    st.sampled_from(list(AtomKind)),
    st.integers(-2, 2),
)


@given(atoms, atoms, st.integers(-3, 3))
def test_evaluate_boolean_homomorphism(a, b, x):
    pt = [Fraction(x)]
    ea, eb = evaluate(a, pt), evaluate(b, pt)
    assert evaluate(Conj((a, b)), pt) == (ea and eb)
    assert evaluate(Disj((a, b)), pt) == (ea or eb)
    assert evaluate(Neg(a), pt) == (not ea)


def test_tower_expand_examples():
    assert tower_expand(TowerValue(1, 3)) == 256
    assert tower_expand(TowerValue(Fraction(3, 4), 2, -1)) == Fraction(3, 64)
    with pytest.raises(TowerBudgetError, match="bits"):
        tower_expand(TowerValue(1, 60))


def test_failing_constraints_reports_range_violation():
    d = Fraction(1, 10)
    inst = ranged(Fragment.INV, [(1 - d, 1 + d)] * 2, [InvEq(0, 1)], d)
    assert failing_constraints(inst, [1, 1]) == []
    assert failing_constraints(inst, [4, Fraction(1, 4)]) == [-1]


def test_annotation_center_and_value():
    ann = VarAnnotation.from_polys((0, 1), X * Y + X + Y + 1)
    assert ann.center == 1
    assert ann.value([Fraction(3, 2), Fraction(2)]) == 3
    with pytest.raises(ValueError):
        VarAnnotation((0,), (0, 0, 0, 0, 1, 1))
    with pytest.raises(ValueError):
        VarAnnotation((), (0, 0, 0, 0, 0, 1), (0, 0, 0, 0, 0, 0))
