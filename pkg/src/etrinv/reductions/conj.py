"""Lowering of an arbitrary quantifier-free formula to a conjunction of
polynomial equations and sign conditions on single variables.

Steps: push negations to the atoms; replace strict inequalities q > 0 by
q*z - 1 = 0 with a global z >= 0; replace q >= 0 by q - z = 0 with a global
z >= 0; collapse each disjunction into one equation (product of factors) and
each conjunction beneath a disjunction into a sum of squares.

A negated equation not(q = 0) becomes q*z - 1 = 0 with z unconstrained, which
keeps z = 1/q a valid forward value on both signs of q.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import List, Tuple

from ..formula import (
    Atom,
    AtomKind,
    Conj,
    Disj,
    FormulaNode,
    Fragment,
    GeqZero,
    Instance,
    Neg,
    PolyEq,
)
from ..polynomial import Polynomial, RatFunc
from ..witness import WitnessMap
from .builder import Builder, PassReport, make_report, projection_witness


@dataclass(frozen=True)
class _NotZero:
    poly: Polynomial


def _constant_truth(node) -> bool:
    c = node.poly.constant_term()
    if isinstance(node, _NotZero):
        return c != 0
    if node.kind is AtomKind.EQ:
        return c == 0
    return c > 0 if node.kind is AtomKind.GT else c >= 0


def to_nnf(node: FormulaNode, negate: bool = False):
    """Negation normal form; negated atoms are rewritten into positive ones."""
    if isinstance(node, Neg):
        return to_nnf(node.child, not negate)
    if isinstance(node, Atom):
        if not negate:
            return node
        if node.kind is AtomKind.GT:
            return Atom(AtomKind.GEQ, -node.poly)
        if node.kind is AtomKind.GEQ:
            return Atom(AtomKind.GT, -node.poly)
        return _NotZero(node.poly)
    kids = tuple(to_nnf(c, negate) for c in node.children)
    flip = negate
    if isinstance(node, Conj):
        return Disj(kids) if flip else Conj(kids)
    return Conj(kids) if flip else Disj(kids)


class _ConjPass:
    def __init__(self, source: Instance):
        self.source = source
        n = source.n
        self.b = Builder(Fragment.CONJ, n, source.names)
        for i, v in enumerate(source.vars):
            self.b.add_var(v.name, RatFunc.var(i))
        self.nonneg: List[int] = []

    def value(self, p: Polynomial) -> RatFunc:
        """Forward value of an output-space polynomial in source coordinates."""
        return p.substitute_rational(dict(enumerate(self.b.forward)))

    def fresh(self, forward: RatFunc, label: str) -> Polynomial:
        return Polynomial.var(self.b.fresh("z", forward, label=label))

    # atoms to equations (steps 2 and 3)
    def equation(self, node, top: bool) -> Polynomial | None:
        """Polynomial P with node <=> P = 0 (plus recorded side constraints).

        Returns None when a top-level atom was emitted directly.
        """
        if node.poly.is_constant():
            # constant atoms fold to 0 = 0 or 1 = 0
            return Polynomial.const(0 if _constant_truth(node) else 1)
        if isinstance(node, _NotZero):
            z = self.fresh(RatFunc(1, node.poly), "1/q")
            return node.poly * z - 1
        if node.kind is AtomKind.EQ:
            return node.poly
        if node.kind is AtomKind.GT:
            z = self.fresh(RatFunc(1, node.poly), "1/q")
            self.nonneg.append(z.as_single_variable())
            return node.poly * z - 1
        x = node.poly.as_single_variable()
        if top and x is not None:
            self.b.add(GeqZero(x))
            return None
        z = self.fresh(RatFunc(node.poly), "q")
        self.nonneg.append(z.as_single_variable())
        return node.poly - z

    def as_factor(self, p: Polynomial) -> Polynomial:
        if p.as_single_variable() is not None:
            return p
        u = self.fresh(self.value(p), "factor")
        self.b.add(PolyEq(p - u))
        return u

    def collapse(self, node) -> Polynomial:
        """Single equation equivalent to a subformula beneath a disjunction."""
        if isinstance(node, (Atom, _NotZero)):
            return self.equation(node, top=False)
        if isinstance(node, Disj):
            if not node.children:
                return Polynomial.const(1)
            parts = [self.collapse(c) for c in node.children]
            if len(parts) == 1:
                return parts[0]
            prod = Polynomial.const(1)
            for p in parts:
                prod = prod * self.as_factor(p)
            return prod
        parts = [self.collapse(c) for c in node.children]
        if not parts:
            return Polynomial.const(0)
        if len(parts) == 1:
            return parts[0]
        total = Polynomial.const(0)
        for p in parts:
            u = p if p.as_single_variable() is not None else self.as_factor(p)
            total = total + u * u
        return total

    def top(self, node) -> None:
        if isinstance(node, Conj):
            for c in node.children:
                self.top(c)
            return
        if isinstance(node, Disj):
            self.b.add(PolyEq(self.collapse(node)))
            return
        eq = self.equation(node, top=True)
        if eq is not None:
            self.b.add(PolyEq(eq))

    def run(self) -> Tuple[Instance, WitnessMap]:
        if self.source.formula is not None:
            self.top(to_nnf(self.source.formula))
        for z in self.nonneg:
            self.b.add(GeqZero(z))
        out = self.b.instance()
        w = projection_witness("conj", self.b.forward_map(), self.source.n)
        return out, w


def to_conj(source: Instance) -> Tuple[Instance, WitnessMap, PassReport]:
    if source.fragment is not Fragment.ETR:
        raise ValueError(f"to_conj expects an ETR instance, got {source.fragment.value}")
    started = time.perf_counter()
    out, w = _ConjPass(source).run()
    return out, w, make_report("conj", source, out, started)
