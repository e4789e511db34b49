"""Replacing multiplication by squaring.

Every product of a shifted instance has the form <x+1> * <y+1> = <xy+x+y+1>.
Squares of a single variable become SquareEq directly; a general product goes
through the difference-of-squares gadget, whose intermediates all sit near
3/4, 1 or 3/2. Variables of the shifted instance are carried over unchanged and
keep their intervals.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Dict

from ..formula import (
    UNIT_RANGE,
    Fragment,
    Instance,
    Interval,
    PlusEq,
    SquareEq,
    TimesEq,
    validate_fragment,
)
from ..polynomial import RatFunc
from ..rational import format_rational
from .builder import Builder, GadgetCertificationError, PassError, make_report, projection_witness
from .gadgets import (
    SQUARE_TIMES_GADGET,
    SQUARE_TIMES_INPUTS,
    SQUARE_TIMES_OUTPUT,
    constant_annotation,
    emit_program,
    find_constant,
    square_times_solution,
)
from .shift import certify_or_raise

SQUARE_RATIO = 10
SQUARE_CENTERS = (Fraction(3, 4), Fraction(1), Fraction(3, 2))


def check_square_gadget() -> None:
    """Reject the gadget unless every local has denominator 1, coefficients in
    [0, 2] and a center in {3/4, 1, 3/2}."""
    sol = square_times_solution()
    for name, rf in sol.items():
        if name in SQUARE_TIMES_INPUTS or name == SQUARE_TIMES_OUTPUT or name == "one":
            continue
        if not rf.den.is_constant():
            raise GadgetCertificationError(f"gadget variable {name} has a nonconstant denominator")
        poly = rf.num * (1 / rf.den.constant_term())
        center = poly.constant_term()
        if center not in SQUARE_CENTERS:
            raise GadgetCertificationError(f"gadget variable {name} centered at {format_rational(center)}")
        for mono, c in poly.items():
            if mono and not 0 <= c <= 2:
                raise GadgetCertificationError(f"gadget variable {name} has coefficient {format_rational(c)}")


def to_square(source: Instance, delta2):
    if source.fragment is not Fragment.SHIFT:
        raise ValueError(f"to_square expects a SHIFT instance, got {source.fragment.value}")
    delta2 = Fraction(delta2)
    if not 0 < delta2 < Fraction(1, 4):
        raise PassError("δ₂ must be < 1/4")
    if source.delta is None or source.delta * SQUARE_RATIO != delta2:
        raise PassError(f"to_square needs δ₁ = δ₂/10, got δ₁={source.delta} for δ₂={format_rational(delta2)}")
    check_square_gadget()
    started = time.perf_counter()
    n = source.n
    b = Builder(Fragment.SQUARE, n, source.names)
    for i, v in enumerate(source.vars):
        b.add_var(v.name, RatFunc.var(i), v.interval, v.annotation, v.label)

    def make_interval(c: Fraction) -> Interval:
        return Interval(c - delta2, c + delta2).intersect(UNIT_RANGE)

    def constant(c: Fraction) -> int:
        idx = find_constant(source, c)
        if idx is None:
            idx = b.fresh("k", RatFunc(c), label=f"<{format_rational(c)}>",
                          interval=make_interval(c), annotation=constant_annotation(c))
        return idx

    consts: Dict[str, int] = {}
    solution = square_times_solution()
    gadgets = 0
    for c in source.constraints:
        if isinstance(c, PlusEq):
            b.add(c)
        elif isinstance(c, TimesEq):
            if c.x == c.y:
                b.add(SquareEq(c.x, c.z))
                continue
            if not consts:
                consts = {"half": constant(Fraction(1, 2)), "tq": constant(Fraction(3, 4))}
            bound = {"a": c.x, "b": c.y, "c": c.z, **consts}
            emit_program(b, SQUARE_TIMES_GADGET, solution, bound, (c.x, c.y), "g", make_interval)
            gadgets += 1
        else:
            raise ValueError(f"unexpected constraint {c.kind} in a SHIFT instance")
    if find_constant(source, Fraction(1)) is None:
        one = constant(Fraction(1))
        b.add(SquareEq(one, one))
    out = b.instance(delta=delta2, source_delta=source.delta, inherited=range(n))
    problems = validate_fragment(out)
    if problems:
        raise GadgetCertificationError(f"square output invalid: {problems[0]}")
    certify_or_raise(out, source.delta, "square")
    w = projection_witness("square", b.forward_map(), n)
    return out, w, make_report("square", source, out, started, gadgets=gadgets)
