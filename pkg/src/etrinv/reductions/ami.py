"""Flattening of polynomial equations into addition, multiplication, x >= 0 and
x = 1 constraints.

Constants come from <1> = 1, <1> + <0> = <1>, <1> + <-1> = <0>; integer
constants are assembled in binary (doubling and adding <1>), minus signs become
products with <-1>, and every operation gets its own fresh variable. The last
operation of each equation writes into <0>.
"""

from __future__ import annotations

import time
from math import lcm
from typing import Dict, Tuple

from ..formula import EqOne, Fragment, GeqZero, Instance, PlusEq, PolyEq, TimesEq
from ..polynomial import Monomial, Polynomial, RatFunc
from .builder import Builder, make_report, projection_witness


class _AmiPass:
    def __init__(self, source: Instance):
        self.source = source
        self.b = Builder(Fragment.AMI, source.n, source.names)
        for i, v in enumerate(source.vars):
            self.b.add_var(v.name, RatFunc.var(i), label=v.label)
        self.one = self.b.fresh("k", RatFunc(1), label="<1>")
        self.zero = self.b.fresh("k", RatFunc(0), label="<0>")
        self.minus_one = self.b.fresh("k", RatFunc(-1), label="<-1>")
        self.b.add(EqOne(self.one))
        self.b.add(PlusEq(self.one, self.zero, self.one))
        self.b.add(PlusEq(self.one, self.minus_one, self.zero))
        self.consts: Dict[int, int] = {1: self.one, 0: self.zero, -1: self.minus_one}
        self.powers: Dict[Tuple[int, int], int] = {}

    def op(self, kind, x: int, y: int, label: str, target: int | None = None) -> int:
        if target is None:
            fx, fy = self.b.forward[x], self.b.forward[y]
            value = fx + fy if kind is PlusEq else fx * fy
            target = self.b.fresh("a", value, label=label)
        self.b.add(kind(x, y, target))
        return target

    def const(self, c: int) -> int:
        if c in self.consts:
            return self.consts[c]
        if c < 0:
            idx = self.op(TimesEq, self.minus_one, self.const(-c), f"<{c}>")
        else:
            # Horner over the binary digits of c
            acc, val = self.one, 1
            for bit in bin(c)[3:]:
                acc, val = self._cached_sum(acc, acc, val * 2)
                if bit == "1":
                    acc, val = self._cached_sum(acc, self.one, val + 1)
            idx = acc
        self.consts[c] = idx
        return idx

    def _cached_sum(self, x: int, y: int, value: int) -> Tuple[int, int]:
        if value not in self.consts:
            self.consts[value] = self.op(PlusEq, x, y, f"<{value}>")
        return self.consts[value], value

    def power(self, v: int, e: int) -> int:
        if e == 1:
            return v
        key = (v, e)
        if key in self.powers:
            return self.powers[key]
        half = self.power(v, e // 2)
        sq = self.op(TimesEq, half, half, f"<{self.source.names[v]}^{2 * (e // 2)}>")
        idx = sq if e % 2 == 0 else self.op(TimesEq, sq, v, f"<{self.source.names[v]}^{e}>")
        self.powers[key] = idx
        return idx

    def term(self, mono: Monomial, coef: int) -> int:
        factors = [self.power(v, e) for v, e in mono]
        if coef != 1 or not factors:
            factors.insert(0, self.const(coef))
        acc = factors[0]
        for f in factors[1:]:
            acc = self.op(TimesEq, acc, f, "<term>")
        return acc

    def equation(self, p: Polynomial) -> None:
        if p.is_zero():
            return
        scale = lcm(*(c.denominator for _, c in p.items()))
        terms = [self.term(m, int(c * scale)) for m, c in p.items()]
        if len(terms) == 1:
            self.b.add(PlusEq(terms[0], self.zero, self.zero))
            return
        acc = terms[0]
        for t in terms[1:-1]:
            acc = self.op(PlusEq, acc, t, "<sum>")
        self.b.add(PlusEq(acc, terms[-1], self.zero))

    def run(self):
        for c in self.source.constraints:
            if isinstance(c, PolyEq):
                self.equation(c.poly)
            elif isinstance(c, GeqZero):
                self.b.add(c)
            else:
                raise ValueError(f"unexpected constraint {c.kind} in a CONJ instance")
        out = self.b.instance()
        return out, projection_witness("ami", self.b.forward_map(), self.source.n)


def to_ami(source: Instance):
    if source.fragment is not Fragment.CONJ:
        raise ValueError(f"to_ami expects a CONJ instance, got {source.fragment.value}")
    started = time.perf_counter()
    out, w = _AmiPass(source).run()
    return out, w, make_report("ami", source, out, started)
