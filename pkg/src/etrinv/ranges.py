"""Interval bounds for degree-2 rational functions of two small arguments, and a
certifier that checks every annotated variable of a range instance against its
declared interval.

For g = p/q with p = a1 x^2 + a2 xy + a3 y^2 + a4 x + a5 y + a6 (q likewise with b)
and x, y in [-d, d], d <= 1, each nonconstant term is bounded by |coef| * d, so
p lies in [a6 - alpha d, a6 + alpha d] with alpha = |a1| + ... + |a5| and q in
[b6 - beta d, b6 + beta d] with beta = |b1| + ... + |b5|. The bound on g is the
quotient interval; when both numerator endpoints are nonnegative it is
[(a6 - alpha d)/(b6 + beta d), (a6 + alpha d)/(b6 - beta d)].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from .formula import (
    UNIT_RANGE,
    Instance,
    Interval,
    SquareEq,
    TimesEq,
    VarAnnotation,
)
from .rational import format_rational


class BoundError(ValueError):
    pass


class MissingAnnotation(ValueError):
    pass


def _coefs(values: Sequence) -> tuple:
    out = tuple(Fraction(v) for v in values)
    if len(out) != 6:
        raise BoundError("expected six coefficients")
    return out


@dataclass(frozen=True)
class BiquadraticBound:
    a: tuple
    b: tuple
    delta: Fraction
    alpha: Fraction
    beta: Fraction
    interval: Interval


def numerator_range(a: Sequence, delta) -> Interval:
    a = _coefs(a)
    alpha = sum(abs(c) for c in a[:5])
    return Interval(a[5] - alpha * delta, a[5] + alpha * delta)


def analyze(a: Sequence, b: Sequence, delta) -> BiquadraticBound:
    a, b = _coefs(a), _coefs(b)
    delta = Fraction(delta)
    if b[5] <= 0:
        raise BoundError("constant denominator coefficient b6 must be positive")
    if not 0 <= delta <= 1:
        raise BoundError("delta must lie in [0,1]")
    alpha = sum(abs(c) for c in a[:5])
    beta = sum(abs(c) for c in b[:5])
    if beta * delta >= b[5]:
        raise BoundError("denominator may vanish: beta*delta >= b6")
    p_lo, p_hi = a[5] - alpha * delta, a[5] + alpha * delta
    q_lo, q_hi = b[5] - beta * delta, b[5] + beta * delta
    # q > 0 throughout, so the extremes sit at endpoint quotients
    lo = min(p_lo / q_lo, p_lo / q_hi)
    hi = max(p_hi / q_lo, p_hi / q_hi)
    return BiquadraticBound(a, b, delta, alpha, beta, Interval(lo, hi))


def bound_rational(a: Sequence, b: Sequence, delta) -> Interval:
    return analyze(a, b, delta).interval


def bound_case_a(a: Sequence, delta, c) -> Interval:
    """[a6 - 5 c delta, a6 + 5 c delta], valid when q = 1 and a1..a5 lie in [0, c]."""
    a = _coefs(a)
    c, delta = Fraction(c), Fraction(delta)
    if c < 0 or any(not 0 <= x <= c for x in a[:5]):
        raise BoundError("case (a) needs nonconstant coefficients in [0, c]")
    return Interval(a[5] - 5 * c * delta, a[5] + 5 * c * delta)


def required_delta_case_b(eps, c_bound, a6, b6) -> Fraction:
    """Largest delta for which coefficients in [-c, c] keep g within eps of a6/b6."""
    eps, c_bound, a6, b6 = (Fraction(v) for v in (eps, c_bound, a6, b6))
    if eps <= 0 or c_bound <= 0 or b6 <= 0 or a6 < 0:
        raise BoundError("case (b) threshold needs eps, c, b6 > 0 and a6 >= 0")
    return eps * b6 * b6 / (5 * c_bound * (a6 + (1 + eps) * b6))


def bound_for_annotation(ann: VarAnnotation, delta) -> Interval:
    """Bound for an annotated variable, using one-sided sources when flagged."""
    iv = bound_rational(ann.num, ann.den, delta)
    if ann.nonneg and ann.den[:5] == (0,) * 5 and all(x >= 0 for x in ann.num[:5]):
        # sources in [0, delta]: p is monotone increasing, so p >= a6
        lo = ann.num[5] / ann.den[5]
        return Interval(max(lo, iv.lo), iv.hi)
    return iv


# -- certification ------------------------------------------------------------


@dataclass
class VarCertificate:
    name: str
    center: Optional[Fraction]
    certified: Optional[Interval]
    declared: Optional[Interval]
    passed: bool
    status: str = "annotated"
    message: str = ""

    def to_json(self) -> dict:
        def iv(i):
            return None if i is None else [format_rational(i.lo), format_rational(i.hi)]

        out = {
            "name": self.name,
            "center": None if self.center is None else format_rational(self.center),
            "certified": iv(self.certified),
            "declared": iv(self.declared),
            "pass": self.passed,
        }
        if self.status != "annotated":
            out["status"] = self.status
        if self.message:
            out["message"] = self.message
        return out


@dataclass
class CertificateReport:
    delta_source: Fraction
    variables: List[VarCertificate] = field(default_factory=list)
    operand_failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.operand_failures and all(v.passed for v in self.variables)

    @property
    def failures(self) -> List[VarCertificate]:
        return [v for v in self.variables if not v.passed]

    def to_json(self) -> dict:
        return {
            "delta_source": format_rational(self.delta_source),
            "pass": self.ok,
            "variables": [v.to_json() for v in self.variables],
            "operand_failures": list(self.operand_failures),
        }


def certify_instance(inst: Instance, delta_source=None) -> CertificateReport:
    """Check each annotated variable's certified range against I(x) and [1/2, 2].

    Variables listed in ``inst.inherited`` were certified by an earlier stage and
    keep their declared interval (their annotations, if any, refer to that
    stage's delta); every other variable must carry an annotation.
    """
    if delta_source is None:
        delta_source = inst.source_delta
    if delta_source is None:
        raise BoundError("no source delta given and none recorded on the instance")
    delta_source = Fraction(delta_source)
    report = CertificateReport(delta_source)
    inherited = set(inst.inherited)
    certified: List[Optional[Interval]] = []
    for idx, v in enumerate(inst.vars):
        declared = v.interval
        ann = v.annotation
        if idx in inherited or ann is None:
            if idx not in inherited:
                raise MissingAnnotation(f"variable {v.name} has no annotation")
            ok = declared is not None and declared.within(UNIT_RANGE)
            report.variables.append(VarCertificate(v.name, None, declared, declared, ok, "inherited"))
            certified.append(declared)
            continue
        try:
            iv = bound_for_annotation(ann, delta_source)
        except BoundError as exc:
            report.variables.append(VarCertificate(v.name, ann.center, None, declared, False, message=str(exc)))
            certified.append(None)
            continue
        ok = declared is not None and iv.within(declared) and iv.within(UNIT_RANGE)
        msg = "" if ok else "certified range escapes the declared interval"
        report.variables.append(VarCertificate(v.name, ann.center, iv, declared, ok, message=msg))
        certified.append(iv)
    if inst.delta is not None:
        near_one = Interval(1 - inst.delta, 1 + inst.delta)
        for i, c in enumerate(inst.constraints):
            if isinstance(c, TimesEq):
                operands = (c.x, c.y)
            elif isinstance(c, SquareEq):
                operands = (c.x,)
            else:
                continue
            for o in operands:
                iv = certified[o]
                if iv is None or not iv.within(near_one):
                    report.operand_failures.append(
                        f"constraint {i}: operand {inst.vars[o].name} not certified inside [1-δ,1+δ]"
                    )
    return report
