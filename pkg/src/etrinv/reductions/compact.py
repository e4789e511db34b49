"""Bounding every variable of a conjunctive instance by a squaring tower.

The chain t0 - 2 = 0, t_{i+1} - t_i^2 = 0 (i < k) pins t_k = 2^(2^k); each
variable x then gets slacks s = x + t_k >= 0 and s' = t_k - x >= 0. The result
is equisatisfiable with a compact solution set, but not rationally equivalent,
so the witness only extends solutions forward.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Tuple

from ..formula import Fragment, GeqZero, Instance, PolyEq, TowerValue, formula_length, tower_expand
from ..polynomial import Polynomial, RatFunc
from ..witness import AffineProjection, DeferredMap, RationalMap, WitnessMap
from .builder import Builder, PassReport, TowerMode, make_report


def paper_tower_height(n: int, length: int) -> int:
    """ceil(8 n log2 L), computed exactly as ceil(log2(L^(8n)))."""
    if n == 0 or length <= 1:
        return 0
    return (length ** (8 * n) - 1).bit_length()


def compactify(source: Instance, mode: TowerMode = TowerMode.paper()) -> Tuple[Instance, WitnessMap, PassReport]:
    if source.fragment is not Fragment.CONJ:
        raise ValueError(f"compactify expects a CONJ instance, got {source.fragment.value}")
    started = time.perf_counter()
    n = source.n
    k = paper_tower_height(n, formula_length(source)) if mode.exact else mode.height
    b = Builder(Fragment.CONJ, n, source.names)
    for i, v in enumerate(source.vars):
        b.add_var(v.name, RatFunc.var(i), label=v.label)
    for c in source.constraints:
        b.add(c)
    if n == 0:
        out = b.instance()
        w = WitnessMap(RationalMap.identity(0), AffineProjection.identity(0), "compact", equisat_only=True)
        return out, w, make_report("compact", source, out, started, 0, tower_constraints=0)

    towers = [TowerValue(1, i) for i in range(k + 1)]
    # forward values are filled in by _materialize; placeholders keep indices aligned
    t_idx = []
    for i in range(k + 1):
        t_idx.append(b.fresh("t", Polynomial.const(0), label=f"<2^(2^{i})>"))
    t = [Polynomial.var(i) for i in t_idx]
    b.add(PolyEq(t[0] - 2))
    for i in range(k):
        b.add(PolyEq(t[i + 1] - t[i] * t[i]))
    top = t[k]
    slack = []
    for i in range(n):
        x = Polynomial.var(i)
        name = source.vars[i].name
        lo = b.fresh("s", Polynomial.const(0), label=f"<{name}+T>")
        hi = b.fresh("s", Polynomial.const(0), label=f"<T-{name}>")
        slack.append((i, lo, hi))
        b.add(PolyEq(Polynomial.var(lo) - x - top))
        b.add(GeqZero(lo))
        b.add(PolyEq(Polynomial.var(hi) - top + x))
        b.add(GeqZero(hi))
    out = b.instance()

    def materialize(budget: int) -> RationalMap:
        vals = [tower_expand(tw, budget) for tw in towers]
        comps = [RatFunc.var(i) for i in range(n)]
        comps += [RatFunc(v) for v in vals]
        big = vals[-1]
        for i, _, _ in slack:
            x = Polynomial.var(i)
            comps.append(RatFunc(x + big))
            comps.append(RatFunc(Polynomial.const(big) - x))
        return RationalMap(n, tuple(comps))

    backward = AffineProjection.identity(n)
    if mode.exact:
        fwd = DeferredMap(n, out.n, (towers[-1],), materialize)
        w = WitnessMap(fwd, backward, "compact", equisat_only=True)
    else:
        big = tower_expand(towers[-1])
        w = WitnessMap(materialize(2 ** max(k, 1)), backward, "compact", equisat_only=True, bound=Fraction(big))
    report = make_report("compact", source, out, started, k, tower_constraints=k + 1)
    return out, w, report
