import json
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from etrinv.formula import Atom, AtomKind, Conj, Fragment, Instance, Interval, Neg, PlusEq, Var
from etrinv.oracle import generate_planted, random_formula
from etrinv.parser import (
    InstanceFormatError,
    InstanceWarning,
    ParseError,
    parse_etr,
    parse_instance,
    parse_polynomial,
    print_etr,
    print_instance,
)
from etrinv.polynomial import Polynomial
from etrinv.rational import RationalFormatError

X, Y = Polynomial.var(0), Polynomial.var(1)


def test_conjunction_example():
    node, table = parse_etr("x*y = 1 /\\ x >= 0")
    assert table.names == ("x", "y")
    assert node == Conj((Atom(AtomKind.EQ, X * Y - 1), Atom(AtomKind.GEQ, X)))


def test_negation_example():
    node, _ = parse_etr("not (x = 0)")
    assert node == Neg(Atom(AtomKind.EQ, X))


def test_torus_atom_expands(torus_text):
    node, table = parse_etr(torus_text)
    x, y, z = (Polynomial.var(i) for i in range(3))
    expected = (x * x + y * y + z * z + 24) ** 2 - 100 * (x * x + y * y)
    assert node == Atom(AtomKind.EQ, expected)


def test_comparisons_normalize_to_zero_right_side():
    node, _ = parse_etr("x < y")
    assert node == Atom(AtomKind.GT, Y - X)
    node, _ = parse_etr("x <= 2")
    assert node == Atom(AtomKind.GEQ, 2 - X)


def test_precedence_and_binds_tighter_than_or():
    node, _ = parse_etr("x = 0 \\/ y = 0 /\\ x = 1")
    assert print_etr(node, ["x", "y"]) == "x = 0 \\/ (y = 0 /\\ -1 + x = 0)"


@pytest.mark.parametrize(
    "text,message",
    [
        ("x^-1 = 0", "negative exponent"),
        ("exists x. x = 0", "quantifiers"),
        ("x = ", "line 1"),
        ("x + * y = 0", "col"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_etr(text)


@given(st.integers(0, 10 ** 6))
def test_print_parse_round_trip(seed):
    node, names = random_formula(seed)
    again, table = parse_etr(print_etr(node, names), list(names))
    assert again == node


def test_parse_deterministic(torus_text):
    assert parse_etr(torus_text) == parse_etr(torus_text)


def test_parse_polynomial_fixed_names():
    assert parse_polynomial("x*y - 3/4", ["x", "y"]) == X * Y - Fraction(3, 4)
    with pytest.raises(ParseError):
        parse_polynomial("w + 1", ["x"])


def test_minimal_ami_instance_round_trip():
    text = json.dumps({
        "fragment": "AMI", "delta": None,
        "vars": [{"name": n, "interval": None, "annotation": None} for n in "xyz"],
        "constraints": [{"kind": "plus", "args": ["x", "y", "z"]}],
    }, indent=1)
    inst = parse_instance(text)
    assert inst.constraints == (PlusEq(0, 1, 2),)
    assert print_instance(inst) == text


@pytest.mark.parametrize("frag", ["conj", "ami", "small", "shift", "square", "inv"])
def test_pass_outputs_round_trip(frag):
    inst = generate_planted(3, 5, frag).instance
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        again = parse_instance(print_instance(inst))
    assert again == inst


def test_etr_instance_round_trip():
    inst = generate_planted(7, 6, "etr").instance
    assert parse_instance(print_instance(inst)) == inst


def test_wide_interval_warns():
    inst = Instance(Fragment.SHIFT, (Var("x", Interval(Fraction(1, 2), 2)),), (), None, Fraction(1, 4))
    with pytest.warns(InstanceWarning, match="interval width exceeds 2δ"):
        parse_instance(print_instance(inst))


def test_malformed_inputs():
    with pytest.raises(RationalFormatError, match="not in lowest terms"):
        parse_instance(json.dumps({"fragment": "SMALL", "delta": "6/4", "vars": [], "constraints": []}))
    with pytest.raises(InstanceFormatError, match="unknown fragment"):
        parse_instance(json.dumps({"fragment": "NOPE"}))
    with pytest.raises(InstanceFormatError, match="malformed JSON"):
        parse_instance("{")
