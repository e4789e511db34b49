"""Gadget programs for the range fragments and a symbolic solver for them.

A gadget is a list of constraint templates over local names. Inputs are bound
to existing variables; every other name is introduced by the first template
that mentions it, and each template has exactly one unknown when read in
order. Solving the program symbolically with inputs a = 1 + u, b = 1 + v gives
each local variable as a rational function of (u, v), which becomes its
annotation; the same solve proves the gadget's defining identity.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..formula import (
    Instance,
    InvEq,
    PlusEq,
    SquareEq,
    TimesEq,
    VarAnnotation,
    poly_to_six,
)
from ..polynomial import Polynomial, RatFunc
from .builder import Builder, GadgetCertificationError

U = Polynomial.var(0)
V = Polynomial.var(1)

Template = Tuple  # (constraint class, *local names)

# a * b = c through ((a+b)/2)^2 - a^2/4 - b^2/4 = ab/2, with every
# intermediate kept near 3/4, 1 or 3/2 by halving and shifting
SQUARE_TIMES_GADGET: Tuple[Template, ...] = (
    (PlusEq, "a", "half", "a_3/2"),
    (PlusEq, "ha", "ha", "a_3/2"),
    (PlusEq, "b", "half", "b_3/2"),
    (PlusEq, "hb", "hb", "b_3/2"),
    (PlusEq, "ha", "hb", "ab_3/2"),
    (PlusEq, "mean", "half", "ab_3/2"),
    (SquareEq, "mean", "mean2"),
    (SquareEq, "a", "a2"),
    (SquareEq, "b", "b2"),
    (PlusEq, "a2", "half", "a2_1/2"),
    (PlusEq, "qa", "qa", "a2_1/2"),
    (PlusEq, "qa", "tq", "qa_3/4"),
    (PlusEq, "ea", "ea", "qa_3/4"),
    (PlusEq, "b2", "half", "b2_1/2"),
    (PlusEq, "qb", "qb", "b2_1/2"),
    (PlusEq, "qb", "tq", "qb_3/4"),
    (PlusEq, "eb", "eb", "qb_3/4"),
    (PlusEq, "mean2", "half", "mean2_1/2"),
    (PlusEq, "diff", "ea", "mean2_1/2"),
    (PlusEq, "diff", "tq", "diff_3/4"),
    (PlusEq, "prod_half", "eb", "diff_3/4"),
    (PlusEq, "prod_half", "prod_half", "prod_3/2"),
    (PlusEq, "c", "half", "prod_3/2"),
)
SQUARE_TIMES_INPUTS = ("a", "b", "half", "tq")
SQUARE_TIMES_OUTPUT = "c"

# a^2 = d from additions and inversions:
# 1/(1+u) + 1/2 - 2/(2u+3) doubled, minus 1, inverted gives (2u^2+5u+3)/2
INV_SQUARE_GADGET: Tuple[Template, ...] = (
    (InvEq, "a", "inv_a"),
    (PlusEq, "a", "half", "a_3/2"),
    (InvEq, "a_3/2", "inv_b"),
    (PlusEq, "inv_a", "half", "inv_a_1/2"),
    (PlusEq, "inv_b", "w", "inv_a_1/2"),
    (PlusEq, "w", "w", "w2"),
    (PlusEq, "r", "one", "w2"),
    (InvEq, "r", "s"),
    (PlusEq, "h", "h", "a_3/2"),
    (PlusEq, "t", "h", "s"),
    (PlusEq, "t", "tq", "t_3/4"),
    (PlusEq, "d", "half", "t_3/4"),
)
INV_SQUARE_INPUTS = ("a", "half", "one", "tq")
INV_SQUARE_OUTPUT = "d"


class GadgetSolveError(ValueError):
    pass


def _unknowns(names: Iterable[str], known: Mapping[str, RatFunc]) -> List[str]:
    out = []
    for n in names:
        if n not in known and n not in out:
            out.append(n)
    return out


def solve_step(template: Template, known: Dict[str, RatFunc]) -> Optional[str]:
    """Solve one template for its single unknown; return that name (None if fully known)."""
    kind, *names = template
    unknown = _unknowns(names, known)
    if not unknown:
        return None
    if len(unknown) > 1:
        raise GadgetSolveError(f"{kind.__name__}{tuple(names)} has unknowns {unknown}")
    x = unknown[0]
    if kind is PlusEq:
        p, q, r = names
        if p == q == x:
            known[x] = known[r] * Fraction(1, 2)
        elif r == x:
            known[x] = known[p] + known[q]
        elif p == x:
            known[x] = known[r] - known[q]
        else:
            known[x] = known[r] - known[p]
    elif kind is TimesEq:
        p, q, r = names
        if r == x:
            known[x] = known[p] * known[q]
        elif p == x and q != x:
            known[x] = known[r] / known[q]
        elif q == x and p != x:
            known[x] = known[r] / known[p]
        else:
            raise GadgetSolveError("cannot solve a square root symbolically")
    elif kind is SquareEq:
        p, r = names
        if r != x:
            raise GadgetSolveError("cannot solve a square root symbolically")
        known[x] = known[p] * known[p]
    elif kind is InvEq:
        p, r = names
        other = r if p == x else p
        known[x] = 1 / known[other]
    else:
        raise GadgetSolveError(f"unsupported template {kind.__name__}")
    return x


def solve_program(program: Sequence[Template], known: Mapping[str, RatFunc]) -> Dict[str, RatFunc]:
    values = dict(known)
    for t in program:
        solve_step(t, values)
    return values


def check_program_consistency(program: Sequence[Template], values: Mapping[str, RatFunc]) -> List[int]:
    """Indices of templates that do not hold as identities under ``values``."""
    bad = []
    for i, (kind, *names) in enumerate(program):
        v = [values[n] for n in names]
        if kind is PlusEq:
            ok = (v[0] + v[1]).equals(v[2])
        elif kind is TimesEq:
            ok = (v[0] * v[1]).equals(v[2])
        elif kind is SquareEq:
            ok = (v[0] * v[0]).equals(v[1])
        else:
            ok = (v[0] * v[1]).equals(1)
        if not ok:
            bad.append(i)
    return bad


def _consts() -> Dict[str, RatFunc]:
    return {"half": RatFunc(Fraction(1, 2)), "tq": RatFunc(Fraction(3, 4)), "one": RatFunc(1)}


@lru_cache(maxsize=None)
def square_times_solution() -> Dict[str, RatFunc]:
    """Local values of the multiplication gadget, treating c as unknown."""
    known = {"a": RatFunc(U + 1), "b": RatFunc(V + 1), **_consts()}
    return solve_program(SQUARE_TIMES_GADGET, known)


@lru_cache(maxsize=None)
def inv_square_solution() -> Dict[str, RatFunc]:
    known = {"a": RatFunc(U + 1), **_consts()}
    return solve_program(INV_SQUARE_GADGET, known)


def square_times_identity() -> RatFunc:
    """Value forced on c by the gadget when a = u + 1 and b = v + 1."""
    return square_times_solution()[SQUARE_TIMES_OUTPUT]


def inv_square_identity() -> RatFunc:
    return inv_square_solution()[INV_SQUARE_OUTPUT]


# -- annotations --------------------------------------------------------------


def primitive_six(rf: RatFunc) -> Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]:
    """Integer-primitive (num, den) coefficient vectors with positive constant denominator."""
    num, den = list(poly_to_six(rf.num)), list(poly_to_six(rf.den))
    scale = lcm(*(c.denominator for c in num + den))
    num = [c * scale for c in num]
    den = [c * scale for c in den]
    g = 0
    for c in num + den:
        g = gcd(g, int(c))
    if g > 1:
        num = [c / g for c in num]
        den = [c / g for c in den]
    if den[5] < 0:
        num = [-c for c in num]
        den = [-c for c in den]
    if den[5] == 0:
        raise GadgetCertificationError("annotation denominator vanishes at the center")
    return tuple(Fraction(c) for c in num), tuple(Fraction(c) for c in den)


def annotation_from(rf: RatFunc, sources: Sequence[int], nonneg: bool = False,
                    primitive: bool = False) -> VarAnnotation:
    if rf.den.is_constant() and not primitive:
        return VarAnnotation(tuple(sources), poly_to_six(rf.num), (0, 0, 0, 0, 0, 1), nonneg)
    num, den = primitive_six(rf)
    return VarAnnotation(tuple(sources), num, den, nonneg)


def constant_annotation(c) -> VarAnnotation:
    return VarAnnotation((), (0, 0, 0, 0, 0, Fraction(c)))


def annotation_forward(ann: VarAnnotation, forward: Sequence[RatFunc]) -> RatFunc:
    """Forward value of an annotated variable from its sources' forward values."""
    if not ann.sources:
        return RatFunc(ann.num[5] / ann.den[5])
    subs = {k: forward[s] - 1 for k, s in enumerate(ann.sources)}
    return ann.ratfunc().substitute(subs)


def find_constant(inst: Instance, value: Fraction) -> Optional[int]:
    for i, v in enumerate(inst.vars):
        a = v.annotation
        if a is not None and not a.sources and a.center == value and a.num[:5] == (0,) * 5:
            return i
    return None


# coefficient vectors per (solution, local name, primitive); solutions are lru-cached
_SIX_CACHE: Dict[tuple, tuple] = {}


def emit_program(
    b: Builder,
    program: Sequence[Template],
    solution: Mapping[str, RatFunc],
    bound: Mapping[str, int],
    sources: Sequence[int],
    prefix: str,
    make_interval,
    primitive: bool = False,
) -> Dict[str, int]:
    """Emit a gadget: bound names map to existing variables, the rest become
    fresh variables annotated from ``solution``."""
    where = dict(bound)
    for kind, *names in program:
        for nm in names:
            if nm in where:
                continue
            key = (id(solution), nm, primitive)
            if key not in _SIX_CACHE:
                a = annotation_from(solution[nm], tuple(range(len(sources))), primitive=primitive)
                _SIX_CACHE[key] = (a.num, a.den)
            num, den = _SIX_CACHE[key]
            ann = VarAnnotation(tuple(sources), num, den)
            idx = b.fresh(prefix, annotation_forward(ann, b.forward), label=f"<{nm}>",
                          interval=make_interval(ann.center), annotation=ann)
            where[nm] = idx
        b.add(kind(*(where[nm] for nm in names)))
    return where
