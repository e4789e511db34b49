"""Shifting a small instance into [1/2, 2]: every variable x becomes <x+1>.

Constants <1>, <1/2>, <3/2>, <3/4> and <Delta> = <1 - delta1> are built first;
each source variable gets the helpers <x+3/2>, <x+3/4>, <x+3/4+Delta>, <x+Delta>.
Then

    x + y = z   ->  <x+3/4> + <y+3/4> = <z+3/2>
    x * y = z   ->  the five-equation block through <xy+x+y+1>
    x >= 0      ->  <x+1/2> + <1/2> = <x+1>
    x = delta1  ->  <x+Delta> * <1> = <1>

Every new variable is a degree-2 polynomial in at most two sources with
coefficients in [0, 1], so its range is certified to [c - 5 delta1, c + 5 delta1].
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import List

from ..formula import (
    UNIT_RANGE,
    EqDelta,
    Fragment,
    GeqZero,
    Instance,
    Interval,
    PlusEq,
    TimesEq,
    VarAnnotation,
    validate_fragment,
)
from ..polynomial import Polynomial, RatFunc
from ..ranges import certify_instance
from ..rational import format_rational, power_of_two_exponent
from .builder import Builder, GadgetCertificationError, PassError, make_report, projection_witness
from .gadgets import U, V, annotation_forward, constant_annotation

HALF = Fraction(1, 2)


def check_shift_parameters(delta1, delta2) -> int:
    """Validate 5*delta1 <= delta2 < 1/4 with delta1 = 2^-l; return l."""
    delta1, delta2 = Fraction(delta1), Fraction(delta2)
    if not 0 < delta2 < Fraction(1, 4):
        raise PassError("δ₂ must be < 1/4" if delta2 > 0 else "δ₂ must be positive")
    l = power_of_two_exponent(delta1)
    if l is None or l == 0:
        raise PassError(f"δ₁ must be a power of two below 1, got {format_rational(delta1)}")
    if 5 * delta1 > delta2:
        raise PassError(f"need 5δ₁ <= δ₂, got δ₁={format_rational(delta1)}, δ₂={format_rational(delta2)}")
    return l


def certify_or_raise(inst: Instance, delta_source, stage: str):
    report = certify_instance(inst, delta_source)
    if not report.ok:
        bad = [f"{v.name} certified {v.certified} declared {v.declared}" for v in report.failures[:5]]
        raise GadgetCertificationError(
            f"{stage}: range certification failed: " + "; ".join(bad + report.operand_failures[:5])
        )
    return report


class _ShiftPass:
    def __init__(self, source: Instance, delta2: Fraction):
        self.source = source
        self.d1 = source.delta
        self.d2 = delta2
        self.l = check_shift_parameters(self.d1, delta2)
        self.b = Builder(Fragment.SHIFT, source.n, source.names)

    def interval(self, c: Fraction) -> Interval:
        return Interval(c - self.d2, c + self.d2).intersect(UNIT_RANGE)

    def annotated(self, prefix: str, poly: Polynomial, sources, label: str, interval=None,
                  nonneg: bool = False) -> int:
        ann = VarAnnotation.from_polys(tuple(sources), poly, nonneg=nonneg)
        fwd = annotation_forward(ann, self.b.forward)
        iv = interval if interval is not None else self.interval(ann.center)
        return self.b.fresh(prefix, fwd, label=label, interval=iv, annotation=ann)

    def constant(self, c: Fraction, label: str) -> int:
        return self.b.fresh("k", RatFunc(c), label=label, interval=self.interval(c),
                            annotation=constant_annotation(c))

    def run(self):
        b, src = self.b, self.source
        n = src.n
        r = []
        for i, v in enumerate(src.vars):
            ann = VarAnnotation.from_polys((i,), U + 1)
            r.append(b.add_var(b.names.reserve(f"r_{v.name}"), RatFunc(Polynomial.var(i) + 1),
                               self.interval(Fraction(1)), ann, f"<{v.name}+1>"))
        one = self.constant(Fraction(1), "<1>")
        half = self.constant(HALF, "<1/2>")
        three_half = self.constant(Fraction(3, 2), "<3/2>")
        three_quarter = self.constant(Fraction(3, 4), "<3/4>")
        b.add(TimesEq(one, one, one))
        b.add(PlusEq(half, half, one))
        b.add(PlusEq(one, half, three_half))
        b.add(PlusEq(three_quarter, three_quarter, three_half))
        # Delta chain: <1 - 2^-i> for i = 1..l, starting from <1/2>
        cur = half
        for i in range(1, self.l):
            top = self.constant(2 - Fraction(1, 2 ** i), f"<2-2^-{i}>")
            nxt = self.constant(1 - Fraction(1, 2 ** (i + 1)), f"<1-2^-{i + 1}>")
            b.add(PlusEq(cur, one, top))
            b.add(PlusEq(nxt, nxt, top))
            cur = nxt
        delta_c = cur
        big_delta = 1 - self.d1

        p32: List[int] = []
        p34: List[int] = []
        pdelta: List[int] = []
        for i, v in enumerate(src.vars):
            a32 = self.annotated("h", U + Fraction(3, 2), (r[i],), f"<{v.name}+3/2>")
            a34 = self.annotated("h", U + Fraction(3, 4), (r[i],), f"<{v.name}+3/4>")
            a34d = self.annotated("h", U + Fraction(3, 4) + big_delta, (r[i],), f"<{v.name}+3/4+D>")
            # the only operand role of <x+Delta> is a multiplication, so it gets a near-one interval
            ad = self.annotated("h", U + big_delta, (r[i],), f"<{v.name}+D>",
                                interval=Interval(1 - self.d2, 1 + self.d2))
            b.add(PlusEq(r[i], half, a32))
            b.add(PlusEq(a34, three_quarter, a32))
            b.add(PlusEq(a34, delta_c, a34d))
            b.add(PlusEq(ad, three_quarter, a34d))
            p32.append(a32)
            p34.append(a34)
            pdelta.append(ad)

        for c in src.constraints:
            if isinstance(c, PlusEq):
                b.add(PlusEq(p34[c.x], p34[c.y], p32[c.z]))
            elif isinstance(c, TimesEq):
                x, y, z = c.x, c.y, c.z
                nx, ny = src.names[x], src.names[y]
                srcs = (r[x], r[y])
                m1 = self.annotated("m", U * V + U + V + 1, srcs, f"<{nx}{ny}+{nx}+{ny}+1>")
                m2 = self.annotated("m", U * V + U + V + Fraction(3, 2), srcs, f"<{nx}{ny}+{nx}+{ny}+3/2>")
                m3 = self.annotated("m", U * V + U + Fraction(3, 4), srcs, f"<{nx}{ny}+{nx}+3/4>")
                m4 = self.annotated("m", U * V + U + Fraction(3, 2), srcs, f"<{nx}{ny}+{nx}+3/2>")
                b.add(TimesEq(r[x], r[y], m1))
                b.add(PlusEq(m1, half, m2))
                b.add(PlusEq(m3, p34[y], m2))
                b.add(PlusEq(m3, three_quarter, m4))
                b.add(PlusEq(p34[z], p34[x], m4))
            elif isinstance(c, GeqZero):
                x = c.x
                g = self.annotated("g", U + HALF, (r[x],), f"<{src.names[x]}+1/2>",
                                   interval=Interval(HALF, HALF + self.d2), nonneg=True)
                b.add(PlusEq(g, half, r[x]))
            elif isinstance(c, EqDelta):
                b.add(TimesEq(pdelta[c.x], one, one))
            else:
                raise ValueError(f"unexpected constraint {c.kind} in a SMALL instance")

        out = b.instance(delta=self.d2, source_delta=self.d1)
        problems = validate_fragment(out)
        if problems:
            raise GadgetCertificationError(f"shift output invalid: {problems[0]}")
        certify_or_raise(out, self.d1, "shift")
        w = projection_witness("shift", b.forward_map(), n, proj=r, offset=[Fraction(-1)] * n)
        return out, w


def to_shift(source: Instance, delta2):
    if source.fragment is not Fragment.SMALL:
        raise ValueError(f"to_shift expects a SMALL instance, got {source.fragment.value}")
    started = time.perf_counter()
    p = _ShiftPass(source, Fraction(delta2))
    out, w = p.run()
    return out, w, make_report("shift", source, out, started, p.l)
