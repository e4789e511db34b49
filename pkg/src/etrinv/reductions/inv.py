"""Replacing squaring by inversion.

Each square <x+1>^2 = <x^2+2x+1> is rebuilt from additions and inversions x*y = 1
through the partial-fraction gadget in ``gadgets``. Gadget variables are rational
in one source; their annotations are stored with integer-primitive coefficients
so the coefficient window [-1, 15] and the case (b) threshold can be checked
directly.
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
    InvEq,
    PlusEq,
    SquareEq,
    validate_fragment,
)
from ..polynomial import RatFunc
from ..ranges import required_delta_case_b
from ..rational import format_rational
from .builder import Builder, GadgetCertificationError, PassError, make_report, projection_witness
from .gadgets import (
    INV_SQUARE_GADGET,
    INV_SQUARE_INPUTS,
    INV_SQUARE_OUTPUT,
    annotation_from,
    constant_annotation,
    emit_program,
    find_constant,
    inv_square_solution,
)
from .shift import certify_or_raise

INV_RATIO = 1800
INV_COEF_BOUND = 15
INV_CENTER_RANGE = Interval(Fraction(2, 3), Fraction(7, 4))


def check_inv_gadget(delta2: Fraction, delta1: Fraction) -> None:
    """Coefficient window, center window and case (b) threshold for every local."""
    for name, rf in inv_square_solution().items():
        if name in INV_SQUARE_INPUTS or name == INV_SQUARE_OUTPUT:
            continue
        ann = annotation_from(rf, (0,), primitive=True)
        if not INV_CENTER_RANGE.contains(ann.center):
            raise GadgetCertificationError(f"gadget variable {name} centered at {format_rational(ann.center)}")
        for c in ann.num[:5] + ann.den[:5]:
            if not -1 <= c <= INV_COEF_BOUND:
                raise GadgetCertificationError(f"gadget variable {name} has coefficient {format_rational(c)}")
        need = required_delta_case_b(delta2, INV_COEF_BOUND, ann.num[5], ann.den[5])
        if need < delta1:
            raise GadgetCertificationError(
                f"gadget variable {name}: case (b) needs δ ≤ {format_rational(need)}, have {format_rational(delta1)}"
            )


def to_inv(source: Instance, delta2):
    if source.fragment is not Fragment.SQUARE:
        raise ValueError(f"to_inv expects a SQUARE instance, got {source.fragment.value}")
    delta2 = Fraction(delta2)
    if not 0 < delta2 < Fraction(1, 6):
        raise PassError("δ₂ must be < 1/6")
    if source.delta is None or source.delta * INV_RATIO != delta2:
        raise PassError(f"to_inv needs δ₁ = δ₂/1800, got δ₁={source.delta} for δ₂={format_rational(delta2)}")
    check_inv_gadget(delta2, source.delta)
    started = time.perf_counter()
    n = source.n
    b = Builder(Fragment.INV, n, source.names)
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

    one = find_constant(source, Fraction(1))
    if one is None:
        one = constant(Fraction(1))
        b.add(InvEq(one, one))
    three_half = constant(Fraction(3, 2))
    two_thirds = b.fresh("k", RatFunc(Fraction(2, 3)), label="<2/3>",
                         interval=make_interval(Fraction(2, 3)),
                         annotation=constant_annotation(Fraction(2, 3)))
    b.add(InvEq(two_thirds, three_half))

    consts: Dict[str, int] = {}
    solution = inv_square_solution()
    gadgets = 0
    for c in source.constraints:
        if isinstance(c, PlusEq):
            b.add(c)
        elif isinstance(c, SquareEq):
            if c.x == c.y:
                # x^2 = x within [1/2, 2] forces x = 1, as does x * x = 1
                b.add(InvEq(c.x, c.x))
                continue
            if not consts:
                consts = {"half": constant(Fraction(1, 2)), "tq": constant(Fraction(3, 4)), "one": one}
            bound = {"a": c.x, "d": c.y, **consts}
            emit_program(b, INV_SQUARE_GADGET, solution, bound, (c.x,), "v", make_interval, primitive=True)
            gadgets += 1
        else:
            raise ValueError(f"unexpected constraint {c.kind} in a SQUARE instance")
    out = b.instance(delta=delta2, source_delta=source.delta, inherited=range(n))
    problems = validate_fragment(out)
    if problems:
        raise GadgetCertificationError(f"inv output invalid: {problems[0]}")
    report = certify_or_raise(out, source.delta, "inv")
    for cert in report.variables:
        if cert.certified is not None and cert.certified.contains(0):
            raise GadgetCertificationError(f"inversion operand {cert.name} may vanish")
    w = projection_witness("inv", b.forward_map(), n)
    return out, w, make_report("inv", source, out, started, gadgets=gadgets)
