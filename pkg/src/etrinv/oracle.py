"""Brute-force ground truth: grid sampling, planted instances and empirical ranges.

Nothing here decides emptiness. A grid search that finds no solution says
nothing about the real variety; it only confirms or refutes membership of the
grid points themselves.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from .formula import (
    Atom,
    AtomKind,
    Conj,
    Disj,
    EqDelta,
    EqOne,
    FormulaNode,
    Fragment,
    GeqZero,
    Instance,
    Interval,
    Neg,
    PlusEq,
    PolyEq,
    TimesEq,
    Var,
    etr_instance,
    evaluate,
)
from .polynomial import Polynomial

DEFAULT_GRID_CAP = 10 ** 6


class GridCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """``points`` evenly spaced values per axis (endpoints included when >= 2)."""

    intervals: Tuple[Interval, ...]
    points: int
    cap: int = DEFAULT_GRID_CAP

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(self.intervals))
        if self.points < 1:
            raise ValueError("grid needs at least one point per axis")
        if self.size > self.cap:
            raise GridCapExceeded(f"grid has {self.size} points, cap is {self.cap}")

    @classmethod
    def box(cls, n: int, lo, hi, points: int, cap: int = DEFAULT_GRID_CAP) -> "GridSpec":
        return cls(tuple(Interval(lo, hi) for _ in range(n)), points, cap)

    @property
    def size(self) -> int:
        return self.points ** len(self.intervals)

    def axis(self, i: int) -> List[Fraction]:
        iv = self.intervals[i]
        if self.points == 1:
            return [(iv.lo + iv.hi) / 2]
        step = iv.width / (self.points - 1)
        return [iv.lo + k * step for k in range(self.points)]

    def __iter__(self) -> Iterator[Tuple[Fraction, ...]]:
        return itertools.product(*(self.axis(i) for i in range(len(self.intervals))))


def sample_solutions(f: Union[Instance, FormulaNode], grid: GridSpec) -> List[Tuple[Fraction, ...]]:
    """Grid points where ``f`` holds, in lexicographic order."""
    n = len(grid.intervals)
    if isinstance(f, Instance) and f.n != n:
        raise ValueError(f"grid has {n} axes, instance has {f.n} variables")
    return [p for p in grid if evaluate(f, p, None if isinstance(f, Instance) else n)]


# -- empirical range ----------------------------------------------------------


def empirical_range(a: Sequence, b: Sequence, delta, points: int = 41) -> Interval:
    """Exact min and max of p/q over a ``points`` x ``points`` grid on [-delta, delta]^2.

    Coordinates are delta * X / M with integer X in [-M, M]; p and q are scaled
    by M^2 and a common denominator so the scan runs on integers.
    """
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    delta = Fraction(delta)
    if len(a) != 6 or len(b) != 6:
        raise ValueError("expected six coefficients each")
    if points < 2:
        coords = [0]
        m = 1
    else:
        m = points - 1
        # X runs over -m, -m+2, ..., m, i.e. points evenly spaced values
        coords = [2 * k - m for k in range(points)]
    # p(dX/m, dY/m) * m^2 = A1 X^2 + A2 XY + A3 Y^2 + A4 X + A5 Y + A6
    scale = [delta * delta, delta * delta, delta * delta, delta * m, delta * m, Fraction(m * m)]
    pa = [x * s for x, s in zip(a, scale)]
    pb = [x * s for x, s in zip(b, scale)]
    den = lcm(*(x.denominator for x in pa + pb))
    A = [int(x * den) for x in pa]
    B = [int(x * den) for x in pb]
    best_lo = best_hi = None  # stored as (num, den) with den > 0
    for X in coords:
        for Y in coords:
            q = B[0] * X * X + B[1] * X * Y + B[2] * Y * Y + B[3] * X + B[4] * Y + B[5]
            if q == 0:
                raise ZeroDivisionError(
                    f"denominator vanishes at ({delta * X / m}, {delta * Y / m})"
                )
            p = A[0] * X * X + A[1] * X * Y + A[2] * Y * Y + A[3] * X + A[4] * Y + A[5]
            if q < 0:
                p, q = -p, -q
            if best_lo is None or p * best_lo[1] < best_lo[0] * q:
                best_lo = (p, q)
            if best_hi is None or p * best_hi[1] > best_hi[0] * q:
                best_hi = (p, q)
    return Interval(Fraction(*best_lo), Fraction(*best_hi))


# -- planted instances ----------------------------------------------------------


@dataclass
class PlantedFormula:
    instance: Instance
    solutions: List[Tuple[Fraction, ...]]
    trace: List[str] = field(default_factory=list)

    @property
    def fragment(self) -> Fragment:
        return self.instance.fragment

    @property
    def formula(self):
        return self.instance.formula if self.instance.fragment is Fragment.ETR else self.instance.constraints

    def check(self) -> None:
        for s in self.solutions:
            if not evaluate(self.instance, s):
                raise AssertionError(f"planted point {s} does not satisfy the instance")


def _small_rational(rng: random.Random, span: int = 3) -> Fraction:
    return Fraction(rng.randint(-2 * span, 2 * span), 2)


def _random_poly(rng: random.Random, n: int, terms: int = 3, degree: int = 2) -> Polynomial:
    p = Polynomial.const(0)
    for _ in range(rng.randint(1, terms)):
        coef = rng.choice([c for c in range(-3, 4) if c])
        mono = Polynomial.const(coef)
        for _ in range(rng.randint(0, degree)):
            mono = mono * Polynomial.var(rng.randrange(n))
        p = p + mono
    return p


def _names(n: int, prefix: str = "x") -> Tuple[str, ...]:
    return tuple(f"{prefix}{i + 1}" for i in range(n))


class _EtrPlanter:
    """Formula trees whose truth at the planted point is chosen top-down.

    Inequalities only ever appear true, also inside false disjuncts and after
    negations are pushed inward: the strict and non-strict slack encodings
    need a nonnegative slack at the point even where the disjunct fails.
    """

    def __init__(self, rng: random.Random, point: Sequence[Fraction]):
        self.rng = rng
        self.point = list(point)
        self.n = len(point)
        self.atoms = 0

    def atom(self, truth: bool) -> FormulaNode:
        self.atoms += 1
        rng = self.rng
        p = _random_poly(rng, self.n)
        base = p - p.evaluate(self.point)
        if not truth:
            # false leaves are equations only; their factor is nonzero but harmless
            return Atom(AtomKind.EQ, base + rng.choice([-2, -1, 1, 2]))
        choice = rng.random()
        if choice < 0.4:
            return Atom(AtomKind.EQ, base)
        slack = Fraction(rng.randint(0, 3))
        if choice < 0.6:
            return Atom(AtomKind.GEQ, base + slack)
        if choice < 0.8:
            return Atom(AtomKind.GT, base + slack + 1)
        # a negated false atom: the pushed-in form is a true inequality or q != 0
        kind = rng.choice([AtomKind.EQ, AtomKind.GEQ, AtomKind.GT])
        return Neg(Atom(kind, base - slack - 1))

    def node(self, truth: bool, budget: int) -> FormulaNode:
        rng = self.rng
        if budget <= 1 or rng.random() < 0.35:
            return self.atom(truth)
        k = rng.randint(2, min(3, budget))
        share = max(1, (budget - 1) // k)
        if rng.random() < 0.5:
            # conjunction: true needs all children true, false needs one false child
            truths = [True] * k
            if not truth:
                truths[rng.randrange(k)] = False
            return Conj(tuple(self.node(t, share) for t in truths))
        truths = [False] * k
        if truth:
            truths[rng.randrange(k)] = True
        return Disj(tuple(self.node(t, share) for t in truths))


def _plant_etr(rng: random.Random, size: int) -> PlantedFormula:
    n = rng.randint(1, 3)
    point = tuple(_small_rational(rng) for _ in range(n))
    planter = _EtrPlanter(rng, point)
    node = planter.node(True, size)
    inst = etr_instance(node, _names(n))
    return PlantedFormula(inst, [point], [f"etr: {planter.atoms} atoms at {point}"])


def _plant_conj(rng: random.Random, size: int) -> PlantedFormula:
    n = max(1, size // 2 + 1)
    point = tuple(_small_rational(rng) for _ in range(n))
    cons = []
    trace = []
    for _ in range(size):
        nonneg = [i for i, x in enumerate(point) if x >= 0]
        if nonneg and rng.random() < 0.25:
            i = rng.choice(nonneg)
            cons.append(GeqZero(i))
            trace.append(f"x{i + 1} >= 0")
        else:
            p = _random_poly(rng, n)
            cons.append(PolyEq(p - p.evaluate(point)))
            trace.append("poly")
    inst = Instance(Fragment.CONJ, tuple(Var(nm) for nm in _names(n)), tuple(cons))
    return PlantedFormula(inst, [point], trace)


def _plant_flat(rng: random.Random, size: int, fragment: Fragment, delta: Optional[Fraction]) -> PlantedFormula:
    """AMI or SMALL constraints grown around the point; each new constraint
    usually defines a fresh variable from existing ones."""
    small = fragment is Fragment.SMALL
    if size == 0:
        return PlantedFormula(Instance(fragment, (), (), None, delta), [()], [])
    if small:
        unit = delta / 8
        def base():
            return unit * rng.randint(-4, 4)
    else:
        def base():
            return _small_rational(rng, 2)
    values: List[Fraction] = [base() for _ in range(rng.randint(1, 3))]
    cons = []
    trace = []
    for _ in range(size):
        roll = rng.random()
        m = len(values)
        if roll < 0.35:
            x, y = rng.randrange(m), rng.randrange(m)
            s = values[x] + values[y]
            if small and abs(s) > delta:
                cons.append(TimesEq(x, y, m))
                values.append(values[x] * values[y])
                trace.append("times")
                continue
            cons.append(PlusEq(x, y, m))
            values.append(s)
            trace.append("plus")
        elif roll < 0.7:
            x, y = rng.randrange(m), rng.randrange(m)
            cons.append(TimesEq(x, y, m))
            values.append(values[x] * values[y])
            trace.append("times")
        elif roll < 0.85:
            nonneg = [i for i, v in enumerate(values) if v >= 0]
            if nonneg:
                cons.append(GeqZero(rng.choice(nonneg)))
            else:
                values.append(abs(base()))
                cons.append(GeqZero(m))
            trace.append("geq0")
        else:
            if small:
                values.append(delta)
                cons.append(EqDelta(m))
                trace.append("eqdelta")
            else:
                values.append(Fraction(1))
                cons.append(EqOne(m))
                trace.append("eq1")
    inst = Instance(fragment, tuple(Var(nm) for nm in _names(len(values))), tuple(cons), None, delta)
    return PlantedFormula(inst, [tuple(values)], trace)


DEFAULT_PLANT_DELTAS = {
    Fragment.SHIFT: Fraction(1, 8),
    Fragment.SQUARE: Fraction(1, 8),
    Fragment.INV: Fraction(1, 8),
}


def generate_planted(seed: int, size: int, fragment: Fragment | str, delta=None) -> PlantedFormula:
    """A random instance of ``fragment`` with one recorded exact solution.

    Range fragments are produced by running a planted small-box instance
    through the shifting passes, so they have the shape those passes emit;
    ``delta`` is then the delta of the requested fragment.
    """
    fragment = Fragment(fragment.upper()) if isinstance(fragment, str) else Fragment(fragment)
    rng = random.Random(f"{seed}:{size}:{fragment.value}")
    if fragment is Fragment.ETR:
        if size == 0:
            return PlantedFormula(etr_instance(Conj(()), ()), [()], [])
        out = _plant_etr(rng, size)
    elif fragment is Fragment.CONJ:
        out = _plant_conj(rng, size)
    elif fragment is Fragment.AMI:
        out = _plant_flat(rng, size, fragment, None)
    elif fragment is Fragment.SMALL:
        d = Fraction(1, 64) if delta is None else Fraction(delta)
        out = _plant_flat(rng, size, fragment, d)
    else:
        from .pipeline import derive_deltas
        from .reductions.shift import to_shift
        from .reductions.square import to_square
        from .reductions.inv import to_inv

        target_delta = DEFAULT_PLANT_DELTAS[fragment] if delta is None else Fraction(delta)
        deltas = derive_deltas(fragment, target_delta)
        base = _plant_flat(rng, size, Fragment.SMALL, deltas[Fragment.SMALL])
        inst, point = base.instance, base.solutions[0]
        for frag, fn in ((Fragment.SHIFT, to_shift), (Fragment.SQUARE, to_square), (Fragment.INV, to_inv)):
            inst, w, _ = fn(inst, deltas[frag])
            point = tuple(w.apply(point))
            if frag is fragment:
                break
        out = PlantedFormula(inst, [point], base.trace + [f"lifted to {fragment.value}"])
    out.check()
    return out


# -- unconstrained random formulas ----------------------------------------------


def random_formula(seed: int, max_tokens: int = 40, n_vars: int = 3) -> Tuple[FormulaNode, Tuple[str, ...]]:
    """A random formula tree (no planted truth) whose printed form has at most
    ``max_tokens`` tokens."""
    from .parser import print_etr, tokenize

    rng = random.Random(seed)
    names = _names(n_vars)

    def gen(depth: int) -> FormulaNode:
        r = rng.random()
        if depth <= 0 or r < 0.4:
            kind = rng.choice(list(AtomKind))
            return Atom(kind, _random_poly(rng, n_vars, terms=2))
        if r < 0.55:
            return Neg(gen(depth - 1))
        k = rng.randint(2, 3)
        cls = Conj if r < 0.8 else Disj
        return cls(tuple(gen(depth - 1) for _ in range(k)))

    while True:
        node = gen(rng.randint(0, 3))
        if len(tokenize(print_etr(node, names))) <= max_tokens:
            return node, names
