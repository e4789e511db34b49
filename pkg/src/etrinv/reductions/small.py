"""Scaling an AMI instance into a small box around the origin.

With eps = delta * 2^(-2^H), every variable x becomes <eps x>. The constant
<eps> is built by repeated squaring from <delta>:

    <delta> = delta,  <0> + <delta> = <delta>,  h + h = <delta>  (h = delta/2)
    e_i * e_i = q_i,  e_{i+1} * <delta> = q_i          (i = 0 .. H-1)
    <eps> + <0> = e_H

H is |AMI| + 5 in paper-exact mode, where eps cannot be expanded and the
witness stays deferred.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Dict, List

from ..formula import (
    EqDelta,
    EqOne,
    Fragment,
    GeqZero,
    Instance,
    PlusEq,
    TimesEq,
    TowerValue,
    formula_length,
    tower_expand,
)
from ..polynomial import Polynomial, RatFunc
from ..rational import format_rational, is_dyadic
from ..witness import AffineProjection, DeferredMap, RationalMap, WitnessMap
from .builder import Builder, PassError, TowerMode, make_report


def epsilon_tower(delta: Fraction, height: int) -> TowerValue:
    return TowerValue(delta, height, -1)


def to_small(source: Instance, delta, mode: TowerMode = TowerMode.paper()):
    if source.fragment is not Fragment.AMI:
        raise ValueError(f"to_small expects an AMI instance, got {source.fragment.value}")
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise PassError("delta must lie in (0,1)")
    if not is_dyadic(delta):
        raise PassError(f"delta must be dyadic, got {format_rational(delta)}")
    started = time.perf_counter()
    n = source.n
    height = formula_length(source) + 5 if mode.exact else mode.height
    eps_tower = epsilon_tower(delta, height)

    b = Builder(Fragment.SMALL, n, source.names)
    # forward values are symbolic in eps; they are assembled in _forward below
    for i, v in enumerate(source.vars):
        b.add_var(f"e_{v.name}", RatFunc(0), label=f"<eps*{v.name}>")
    d = b.fresh("c", RatFunc(0), label="<delta>")
    zero = b.fresh("c", RatFunc(0), label="<0>")
    b.add(EqDelta(d))
    b.add(PlusEq(zero, d, d))
    chain: List[int] = [b.fresh("c", RatFunc(0), label="<delta*2^-1>")]
    b.add(PlusEq(chain[0], chain[0], d))
    squares: List[int] = []
    for i in range(height):
        q = b.fresh("c", RatFunc(0), label=f"<delta^2*2^-(2^{i + 1})>")
        e = b.fresh("c", RatFunc(0), label=f"<delta*2^-(2^{i + 1})>")
        b.add(TimesEq(chain[i], chain[i], q))
        b.add(TimesEq(e, d, q))
        chain.append(e)
        squares.append(q)
    eps = b.fresh("c", RatFunc(0), label="<eps>")
    b.add(PlusEq(eps, zero, chain[-1]))

    sq_of: Dict[int, int] = {}
    for c in source.constraints:
        if isinstance(c, PlusEq):
            b.add(PlusEq(c.x, c.y, c.z))
        elif isinstance(c, TimesEq):
            if c.z not in sq_of:
                sq_of[c.z] = b.fresh("q", RatFunc(0), label=f"<eps^2*{source.names[c.z]}>")
            b.add(TimesEq(c.x, c.y, sq_of[c.z]))
            b.add(TimesEq(eps, c.z, sq_of[c.z]))
        elif isinstance(c, GeqZero):
            b.add(GeqZero(c.x))
        elif isinstance(c, EqOne):
            b.add(PlusEq(c.x, zero, eps))
        else:
            raise ValueError(f"unexpected constraint {c.kind} in an AMI instance")
    out = b.instance(delta=delta)

    def materialize(budget: int) -> RationalMap:
        e = tower_expand(eps_tower, budget)
        comps = [RatFunc(Polynomial.var(i, e)) for i in range(n)]
        comps.append(RatFunc(delta))
        comps.append(RatFunc(0))
        vals = [delta / 2]
        for i in range(height):
            vals.append(vals[-1] * vals[-1] / delta)
        comps.append(RatFunc(vals[0]))
        for i in range(height):
            comps.append(RatFunc(vals[i] * vals[i]))
            comps.append(RatFunc(vals[i + 1]))
        comps.append(RatFunc(e))
        for z in sq_of:
            comps.append(RatFunc(Polynomial.var(z, e * e)))
        return RationalMap(n, tuple(comps))

    inv_eps = TowerValue(1 / delta, height, 1)
    if mode.exact:
        forward = DeferredMap(n, out.n, (eps_tower,), materialize)
        backward = AffineProjection(tuple(range(n)), (inv_eps,) * n, (Fraction(0),) * n)
    else:
        forward = materialize(2 ** max(height, 1))
        scale = tower_expand(inv_eps, 2 ** max(height, 1))
        backward = AffineProjection(tuple(range(n)), (scale,) * n, (Fraction(0),) * n)
    w = WitnessMap(forward, backward, "small")
    report = make_report(
        "small", source, out, started, height,
        tower_steps=height + 1, tower_constraints=2 * height + 4,
    )
    return out, w, report
