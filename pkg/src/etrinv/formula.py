"""Formula and instance types for the ETR fragment chain, with evaluation,
fragment validation and symbol counting.

Symbol-counting convention (``formula_length``): one symbol per variable
occurrence, operator (``+ - * ^ /``), comparison, parenthesis and binary digit
of an integer constant; every atom carries one extra delimiter symbol and each
binary connective (``/\\``, ``\\/``) counts once. Constant parameters such as
``delta`` count as one symbol. Under this convention ``x + y - z = 0`` has
length 8 and the coefficient 4 (``100`` in binary) contributes 3 symbols.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .polynomial import Polynomial, RatFunc
from .rational import binary_length, format_rational, rational_symbols

HALF = Fraction(1, 2)
TWO = Fraction(2)
DEFAULT_EXPANSION_BUDGET = 2 ** 20


class Fragment(str, enum.Enum):
    ETR = "ETR"
    CONJ = "CONJ"
    AMI = "AMI"
    SMALL = "SMALL"
    SHIFT = "SHIFT"
    SQUARE = "SQUARE"
    INV = "INV"

    @property
    def ranged(self) -> bool:
        return self in (Fragment.SHIFT, Fragment.SQUARE, Fragment.INV)

    @property
    def has_delta(self) -> bool:
        return self in (Fragment.SMALL, Fragment.SHIFT, Fragment.SQUARE, Fragment.INV)


CHAIN = (
    Fragment.ETR,
    Fragment.CONJ,
    Fragment.AMI,
    Fragment.SMALL,
    Fragment.SHIFT,
    Fragment.SQUARE,
    Fragment.INV,
)


# -- intervals and towers ---------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def around(cls, center, radius) -> "Interval":
        return cls(Fraction(center) - radius, Fraction(center) + radius)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi

    def within(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __str__(self) -> str:
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"


UNIT_RANGE = Interval(HALF, TWO)


class TowerBudgetError(ValueError):
    def __init__(self, bits: int, budget: int):
        super().__init__(
            f"tower expansion needs 2^{bits.bit_length() - 1} = {bits} bits, budget is {budget}"
        )
        self.bits = bits
        self.budget = budget


@dataclass(frozen=True)
class TowerValue:
    """mantissa * 2**(sign * 2**height), kept lazy unless small enough to expand."""

    mantissa: Fraction
    height: int
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mantissa", Fraction(self.mantissa))
        if self.mantissa == 0:
            raise ValueError("tower mantissa must be nonzero")
        if self.height < 0 or self.sign not in (1, -1):
            raise ValueError("tower height must be >= 0 and sign +-1")

    @property
    def bits(self) -> int:
        return 2 ** self.height

    def label(self) -> str:
        exp = f"2^{self.height}" if self.sign > 0 else f"-2^{self.height}"
        if self.mantissa == 1:
            return f"2^({exp})"
        return f"{format_rational(self.mantissa)}*2^({exp})"


def tower_expand(value: TowerValue, budget: int = DEFAULT_EXPANSION_BUDGET) -> Fraction:
    if value.bits > budget:
        raise TowerBudgetError(value.bits, budget)
    power = Fraction(2) ** value.bits
    return value.mantissa * power if value.sign > 0 else value.mantissa / power


# -- formula trees ----------------------------------------------------------


class AtomKind(str, enum.Enum):
    EQ = "="
    GEQ = ">="
    GT = ">"


@dataclass(frozen=True)
class Atom:
    kind: AtomKind
    poly: Polynomial


@dataclass(frozen=True)
class Conj:
    children: Tuple["FormulaNode", ...] = ()


@dataclass(frozen=True)
class Disj:
    children: Tuple["FormulaNode", ...] = ()


@dataclass(frozen=True)
class Neg:
    child: "FormulaNode"


FormulaNode = Union[Atom, Conj, Disj, Neg]


def walk_atoms(node: FormulaNode) -> Iterable[Atom]:
    if isinstance(node, Atom):
        yield node
    elif isinstance(node, Neg):
        yield from walk_atoms(node.child)
    else:
        for c in node.children:
            yield from walk_atoms(c)


# -- fragment constraints -----------------------------------------------------


@dataclass(frozen=True)
class PlusEq:
    """x + y = z"""

    x: int
    y: int
    z: int
    kind = "plus"

    def variables(self) -> Tuple[int, ...]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class TimesEq:
    """x * y = z"""

    x: int
    y: int
    z: int
    kind = "times"

    def variables(self) -> Tuple[int, ...]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class SquareEq:
    """x^2 = y"""

    x: int
    y: int
    kind = "square"

    def variables(self) -> Tuple[int, ...]:
        return (self.x, self.y)


@dataclass(frozen=True)
class InvEq:
    """x * y = 1"""

    x: int
    y: int
    kind = "inv"

    def variables(self) -> Tuple[int, ...]:
        return (self.x, self.y)


@dataclass(frozen=True)
class GeqZero:
    x: int
    kind = "geq0"

    def variables(self) -> Tuple[int, ...]:
        return (self.x,)


@dataclass(frozen=True)
class EqOne:
    x: int
    kind = "eq1"

    def variables(self) -> Tuple[int, ...]:
        return (self.x,)


@dataclass(frozen=True)
class EqDelta:
    x: int
    kind = "eqdelta"

    def variables(self) -> Tuple[int, ...]:
        return (self.x,)


@dataclass(frozen=True)
class PolyEq:
    """p = 0"""

    poly: Polynomial
    kind = "poly"

    def variables(self) -> Tuple[int, ...]:
        return tuple(sorted(self.poly.variables()))


Constraint = Union[PlusEq, TimesEq, SquareEq, InvEq, GeqZero, EqOne, EqDelta, PolyEq]

CONSTRAINT_TYPES = {
    cls.kind: cls for cls in (PlusEq, TimesEq, SquareEq, InvEq, GeqZero, EqOne, EqDelta, PolyEq)
}

ALLOWED = {
    Fragment.CONJ: {"poly", "geq0"},
    Fragment.AMI: {"plus", "times", "geq0", "eq1"},
    Fragment.SMALL: {"plus", "times", "geq0", "eqdelta"},
    Fragment.SHIFT: {"plus", "times"},
    Fragment.SQUARE: {"plus", "square"},
    Fragment.INV: {"plus", "inv"},
}


# -- variables and instances ------------------------------------------------


def _six(values) -> Tuple[Fraction, ...]:
    out = tuple(Fraction(v) for v in values)
    if len(out) != 6:
        raise ValueError("expected six coefficients (x^2, xy, y^2, x, y, 1)")
    return out


_SLOT_MONOS = (((0, 2),), ((0, 1), (1, 1)), ((1, 2),), ((0, 1),), ((1, 1),), ())


def poly_to_six(p: Polynomial) -> Tuple[Fraction, ...]:
    """Coefficients (a1..a6) of a degree <= 2 polynomial in slot variables 0, 1."""
    if p.variables() - {0, 1} or p.degree() > 2:
        raise ValueError(f"not a degree <= 2 polynomial in two slots: {p}")
    return tuple(p.coefficient(m) for m in _SLOT_MONOS)


def six_to_poly(coefs: Sequence[Fraction]) -> Polynomial:
    return Polynomial({m: c for m, c in zip(_SLOT_MONOS, coefs)})


@dataclass(frozen=True)
class VarAnnotation:
    """The variable equals num(u, v) / den(u, v) with u = value(sources[0]) - 1,
    v = value(sources[1]) - 1.

    ``nonneg`` records that the source values (u, v) are known to be >= 0, which
    the certifier may use for a one-sided refinement.
    """

    sources: Tuple[int, ...]
    num: Tuple[Fraction, ...]
    den: Tuple[Fraction, ...] = (0, 0, 0, 0, 0, 1)
    nonneg: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "num", _six(self.num))
        object.__setattr__(self, "den", _six(self.den))
        if len(self.sources) > 2:
            raise ValueError("at most two source variables")
        if self.den[5] <= 0:
            raise ValueError("annotation denominator needs a positive constant term")
        used = six_to_poly(self.num).variables() | six_to_poly(self.den).variables()
        if any(slot >= len(self.sources) for slot in used):
            raise ValueError("annotation uses a slot without a source variable")

    @classmethod
    def from_polys(cls, sources, num: Polynomial, den: Polynomial | None = None, nonneg=False):
        den = Polynomial.const(1) if den is None else den
        return cls(tuple(sources), poly_to_six(num), poly_to_six(den), nonneg)

    @property
    def center(self) -> Fraction:
        return self.num[5] / self.den[5]

    def ratfunc(self) -> RatFunc:
        return RatFunc(six_to_poly(self.num), six_to_poly(self.den))

    def value(self, point: Sequence[Fraction]) -> Fraction:
        slots = [point[s] - 1 for s in self.sources] + [Fraction(0)] * (2 - len(self.sources))
        return self.ratfunc().evaluate(slots)

    def remap(self, mapping) -> "VarAnnotation":
        return replace(self, sources=tuple(mapping[s] for s in self.sources))


@dataclass(frozen=True)
class Var:
    name: str
    interval: Optional[Interval] = None
    annotation: Optional[VarAnnotation] = None
    label: Optional[str] = None


class VarTable:
    """Ordered, duplicate-free variable names with stable indices."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: List[str] = []
        self._index: Dict[str, int] = {}
        for n in names:
            self.add(n)

    def add(self, name: str) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        self._index[name] = len(self._names)
        self._names.append(name)
        return self._index[name]

    def index(self, name: str) -> int:
        return self._index[name]

    def get_or_add(self, name: str) -> int:
        if name in self._index:
            return self._index[name]
        return self.add(name)

    def __contains__(self, name) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self):
        return iter(self._names)

    def __getitem__(self, i: int) -> str:
        return self._names[i]

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self._names)

    def __eq__(self, other) -> bool:
        return isinstance(other, VarTable) and self._names == other._names

    def __repr__(self) -> str:
        return f"VarTable({self._names!r})"


@dataclass(frozen=True)
class Instance:
    fragment: Fragment
    vars: Tuple[Var, ...] = ()
    constraints: Tuple[Constraint, ...] = ()
    formula: Optional[FormulaNode] = None
    delta: Optional[Fraction] = None
    source_delta: Optional[Fraction] = None
    # variables carried over from the previous stage, certified there
    inherited: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fragment", Fragment(self.fragment))
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "inherited", tuple(sorted(set(self.inherited))))
        if self.delta is not None:
            object.__setattr__(self, "delta", Fraction(self.delta))
        if self.source_delta is not None:
            object.__setattr__(self, "source_delta", Fraction(self.source_delta))
        names = [v.name for v in self.vars]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")

    @property
    def n(self) -> int:
        return len(self.vars)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.vars)

    @property
    def table(self) -> VarTable:
        return VarTable(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


def etr_instance(node: FormulaNode, table: VarTable | Sequence[str]) -> Instance:
    names = table.names if isinstance(table, VarTable) else tuple(table)
    return Instance(Fragment.ETR, tuple(Var(n) for n in names), (), node)


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    where: str = ""

    def __str__(self) -> str:
        return f"{self.message} ({self.where})" if self.where else self.message


def validate_fragment(inst: Instance, fragment: Fragment | str | None = None) -> List[Violation]:
    frag = Fragment(fragment) if fragment is not None else inst.fragment
    out: List[Violation] = []
    if frag is Fragment.ETR:
        if inst.formula is None and inst.constraints:
            out.append(Violation("illegal-tag", "ETR instance must carry a formula tree"))
        return out
    if inst.formula is not None:
        out.append(Violation("illegal-tag", "formula tree in a constraint fragment"))
    allowed = ALLOWED[frag]
    for i, c in enumerate(inst.constraints):
        if c.kind not in allowed:
            out.append(Violation("illegal-tag", "illegal constraint tag for fragment", f"constraint {i}: {c.kind}"))
        for v in c.variables():
            if not 0 <= v < inst.n:
                out.append(Violation("bad-index", "constraint refers to unknown variable", f"constraint {i}"))
    if frag.has_delta and (inst.delta is None or inst.delta <= 0):
        out.append(Violation("missing-delta", "fragment requires a positive delta"))
    if not frag.ranged or inst.delta is None:
        return out
    d = inst.delta
    near_one = Interval(1 - d, 1 + d)
    for v in inst.vars:
        I = v.interval
        if I is None:
            out.append(Violation("missing-interval", "variable has no interval", v.name))
            continue
        if I.width > 2 * d:
            out.append(Violation("interval-width", "interval width exceeds 2δ", v.name))
        if not I.within(UNIT_RANGE):
            out.append(Violation("interval-range", "interval outside [1/2,2]", v.name))
    for i, c in enumerate(inst.constraints):
        operands: Tuple[int, ...] = ()
        what = ""
        if frag is Fragment.SHIFT and isinstance(c, TimesEq):
            operands, what = (c.x, c.y), "multiplication"
        elif frag is Fragment.SQUARE and isinstance(c, SquareEq):
            operands, what = (c.x,), "squaring"
        for v in operands:
            I = inst.vars[v].interval if 0 <= v < inst.n else None
            if I is not None and not I.within(near_one):
                out.append(
                    Violation(
                        "operand-interval",
                        f"{what} operand interval outside [1−δ,1+δ]",
                        f"constraint {i}: {inst.vars[v].name}",
                    )
                )
    return out


# -- evaluation ---------------------------------------------------------------


class ArityError(ValueError):
    pass


def _holds_atom(atom: Atom, point) -> bool:
    val = atom.poly.evaluate(point)
    if atom.kind is AtomKind.EQ:
        return val == 0
    if atom.kind is AtomKind.GEQ:
        return val >= 0
    return val > 0


def _eval_node(node: FormulaNode, point) -> bool:
    if isinstance(node, Atom):
        return _holds_atom(node, point)
    if isinstance(node, Neg):
        return not _eval_node(node.child, point)
    if isinstance(node, Conj):
        return all(_eval_node(c, point) for c in node.children)
    return any(_eval_node(c, point) for c in node.children)


def constraint_holds(c: Constraint, point, delta: Fraction | None = None) -> bool:
    if isinstance(c, PlusEq):
        return point[c.x] + point[c.y] == point[c.z]
    if isinstance(c, TimesEq):
        return point[c.x] * point[c.y] == point[c.z]
    if isinstance(c, SquareEq):
        return point[c.x] * point[c.x] == point[c.y]
    if isinstance(c, InvEq):
        return point[c.x] * point[c.y] == 1
    if isinstance(c, GeqZero):
        return point[c.x] >= 0
    if isinstance(c, EqOne):
        return point[c.x] == 1
    if isinstance(c, EqDelta):
        return delta is not None and point[c.x] == delta
    return c.poly.evaluate(point) == 0


def failing_constraints(inst: Instance, point) -> List[int]:
    """Indices of violated constraints; -1 marks a [1/2,2] bound violation."""
    point = [Fraction(p) for p in point]
    if len(point) != inst.n:
        raise ArityError(f"point has {len(point)} coordinates, instance has {inst.n} variables")
    bad = [i for i, c in enumerate(inst.constraints) if not constraint_holds(c, point, inst.delta)]
    if inst.fragment.ranged and any(not UNIT_RANGE.contains(x) for x in point):
        bad.append(-1)
    return bad


def evaluate(obj: Union[Instance, FormulaNode], point: Sequence, n: int | None = None) -> bool:
    """Exact truth value at a rational point (membership in V)."""
    point = [Fraction(p) for p in point]
    if isinstance(obj, Instance):
        if obj.fragment is Fragment.ETR:
            if len(point) != obj.n:
                raise ArityError(f"point has {len(point)} coordinates, formula has {obj.n} variables")
            return obj.formula is None or _eval_node(obj.formula, point)
        return not failing_constraints(obj, point)
    if n is not None and len(point) != n:
        raise ArityError(f"point has {len(point)} coordinates, expected {n}")
    return _eval_node(obj, point)


def within_promise(inst: Instance, point) -> bool:
    """Whether each coordinate lies in its declared interval I(x)."""
    return all(v.interval is None or v.interval.contains(Fraction(p)) for v, p in zip(inst.vars, point))


# -- length accounting ------------------------------------------------------


def poly_symbols(p: Polynomial) -> int:
    if p.is_zero():
        return 1
    total = 0
    for i, (mono, coef) in enumerate(p.items()):
        if i > 0 or coef < 0:
            total += 1
        mag = abs(coef)
        if mag != 1 or not mono:
            total += rational_symbols(mag)
            if mono:
                total += 1
        total += max(0, len(mono) - 1)
        for _, e in mono:
            total += 1
            if e > 1:
                total += 1 + binary_length(e)
    return total


_CONSTRAINT_SYMBOLS = {
    "plus": 5,  # x + y = z
    "times": 5,  # x * y = z
    "square": 6,  # x ^ 10 = y
    "inv": 5,  # x * y = 1
    "geq0": 3,  # x >= 0
    "eq1": 3,  # x = 1
    "eqdelta": 3,  # x = delta
}

# 1/2 <= x <= 2 : 1 / 10 <= x <= 10
RANGE_CONJUNCT_SYMBOLS = 9


def constraint_length(c: Constraint) -> int:
    if isinstance(c, PolyEq):
        return poly_symbols(c.poly) + 2 + 1
    return _CONSTRAINT_SYMBOLS[c.kind] + 1


def _node_length(node: FormulaNode) -> int:
    if isinstance(node, Atom):
        return poly_symbols(node.poly) + 2 + 1
    if isinstance(node, Neg):
        inner = _node_length(node.child)
        return 1 + inner + (2 if isinstance(node.child, (Conj, Disj)) else 0)
    kids = node.children
    if not kids:
        return 0
    total = len(kids) - 1
    for c in kids:
        total += _node_length(c)
        if isinstance(c, (Conj, Disj)) and type(c) is not type(node):
            total += 2
    return total


def formula_length(obj: Union[Instance, FormulaNode]) -> int:
    if not isinstance(obj, Instance):
        return _node_length(obj)
    if obj.fragment is Fragment.ETR:
        return 0 if obj.formula is None else _node_length(obj.formula)
    parts = [constraint_length(c) for c in obj.constraints]
    if obj.fragment.ranged:
        parts.extend([RANGE_CONJUNCT_SYMBOLS + 1] * obj.n)
    if not parts:
        return 0
    return sum(parts) + len(parts) - 1
