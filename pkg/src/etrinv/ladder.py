"""Size ladders for measuring how each pass scales with its input.

Each pass gets a fixed block of source constraints; an input of length about
2^j is made of enough disjoint copies of that block. Blocks for the range
fragments are built by hand with declared intervals, so their variables count
as carried (inherited) and need no annotations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Sequence

from .formula import (
    EqDelta,
    EqOne,
    Fragment,
    GeqZero,
    Instance,
    Interval,
    PlusEq,
    PolyEq,
    SquareEq,
    TimesEq,
    Var,
    etr_instance,
    formula_length,
)
from .parser import parse_etr
from .polynomial import Polynomial
from .reductions import TowerMode, to_ami, to_conj, to_inv, to_shift, to_small, to_square

LADDER_EXPONENTS = tuple(range(4, 13))

SMALL_LADDER_DELTA = Fraction(1, 32)
SHIFT_LADDER_DELTA2 = Fraction(1, 5)
SQUARE_LADDER_DELTA1 = Fraction(1, 80)
INV_LADDER_DELTA2 = Fraction(1, 8)


def _near(c, r) -> Interval:
    return Interval(Fraction(c) - r, Fraction(c) + r)


def etr_block(k: int) -> Instance:
    parts = [f"(x{i}*y{i} > 1 \\/ x{i} = 0)" for i in range(k)]
    node, table = parse_etr(" /\\ ".join(parts))
    return etr_instance(node, table)


def conj_block(k: int) -> Instance:
    vars_, cons = [], []
    for i in range(k):
        x, y = Polynomial.var(2 * i), Polynomial.var(2 * i + 1)
        vars_ += [Var(f"x{i}"), Var(f"y{i}")]
        cons += [PolyEq(x * x * y - 2), GeqZero(2 * i + 1)]
    return Instance(Fragment.CONJ, tuple(vars_), tuple(cons))


def ami_block(k: int) -> Instance:
    vars_, cons = [], []
    for i in range(k):
        x, y, z = range(3 * i, 3 * i + 3)
        vars_ += [Var(f"x{i}"), Var(f"y{i}"), Var(f"z{i}")]
        cons += [PlusEq(x, y, z), TimesEq(x, y, z), EqOne(y)]
    return Instance(Fragment.AMI, tuple(vars_), tuple(cons))


def small_block(k: int) -> Instance:
    inst = ami_block(k)
    cons = [EqDelta(c.x) if isinstance(c, EqOne) else c for c in inst.constraints]
    return Instance(Fragment.SMALL, inst.vars, tuple(cons), delta=SMALL_LADDER_DELTA)


def shift_block(k: int) -> Instance:
    r = SQUARE_LADDER_DELTA1
    vars_, cons = [], []
    for i in range(k):
        a, b, c = range(3 * i, 3 * i + 3)
        vars_ += [Var(f"a{i}", _near(1, r)), Var(f"b{i}", _near(1, r)), Var(f"c{i}", _near(1, r))]
        cons += [TimesEq(a, b, c)]
    return Instance(Fragment.SHIFT, tuple(vars_), tuple(cons), delta=r)


def square_block(k: int) -> Instance:
    r = INV_LADDER_DELTA2 / 1800
    vars_, cons = [], []
    for i in range(k):
        a, c = 2 * i, 2 * i + 1
        vars_ += [Var(f"a{i}", _near(1, r)), Var(f"c{i}", _near(1, r))]
        cons += [SquareEq(a, c)]
    return Instance(Fragment.SQUARE, tuple(vars_), tuple(cons), delta=r)


@dataclass(frozen=True)
class LadderPass:
    name: str
    block: Callable[[int], Instance]
    run: Callable[[Instance], tuple]


LADDER_PASSES: Dict[str, LadderPass] = {
    "conj": LadderPass("conj", etr_block, to_conj),
    "ami": LadderPass("ami", conj_block, to_ami),
    "small": LadderPass("small", ami_block, lambda s: to_small(s, SMALL_LADDER_DELTA, TowerMode.test(3))),
    "shift": LadderPass("shift", small_block, lambda s: to_shift(s, SHIFT_LADDER_DELTA2)),
    "square": LadderPass("square", shift_block, lambda s: to_square(s, SQUARE_LADDER_DELTA1 * 10)),
    "inv": LadderPass("inv", square_block, lambda s: to_inv(s, INV_LADDER_DELTA2)),
}


@dataclass(frozen=True)
class Rung:
    copies: int
    input_length: int
    output_length: int
    tower_height: int

    @property
    def ratio(self) -> Fraction:
        """Output length per unit of input length plus tower height."""
        return Fraction(self.output_length, self.input_length + self.tower_height)


def copies_for(block: Callable[[int], Instance], length: int) -> int:
    unit = formula_length(block(1))
    return max(1, length // unit)


def measure(name: str, exponents: Sequence[int] = LADDER_EXPONENTS) -> List[Rung]:
    p = LADDER_PASSES[name]
    rungs = []
    for j in exponents:
        k = copies_for(p.block, 2 ** j)
        src = p.block(k)
        _, _, rep = p.run(src)
        rungs.append(Rung(k, rep.input_length, rep.output_length, rep.tower_height))
    return rungs


def non_increasing(rungs: Sequence[Rung]) -> bool:
    ratios = [r.ratio for r in rungs]
    return all(b <= a for a, b in zip(ratios, ratios[1:]))


def ladder_table(names: Sequence[str] = tuple(LADDER_PASSES)) -> Dict[str, List[Rung]]:
    return {n: measure(n) for n in names}


def format_rungs(name: str, rungs: Sequence[Rung]) -> List[str]:
    return [f"{name:7s} k={r.copies:5d} in={r.input_length:7d} out={r.output_length:9d} "
            f"ratio={float(r.ratio):.3f}" for r in rungs]


# measured once on the ladder above and frozen; a regression that makes a pass
# superlinear or inflates its gadgets trips these
FROZEN_RATIO_BOUNDS: Dict[str, Fraction] = {
    "conj": Fraction(2),
    "ami": Fraction(4),
    "small": Fraction(5),
    "shift": Fraction(25),
    "square": Fraction(13),
    "inv": Fraction(11),
}
