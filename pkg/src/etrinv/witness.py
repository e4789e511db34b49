"""Forward rational maps, backward projection-plus-affine maps, composition and
round-trip checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .formula import (
    DEFAULT_EXPANSION_BUDGET,
    Instance,
    TowerValue,
    failing_constraints,
    tower_expand,
)
from .polynomial import Polynomial, RatFunc
from .rational import format_rational, parse_rational

Scalar = Union[Fraction, TowerValue]


class DomainError(ZeroDivisionError):
    """A forward component's denominator vanishes at the given point."""

    def __init__(self, component: int, stage: str = ""):
        where = f" in stage {stage}" if stage else ""
        super().__init__(f"denominator of forward component {component} vanishes{where}")
        self.component = component


class ArityMismatch(ValueError):
    pass


def scalar_value(s: Scalar, budget: int = DEFAULT_EXPANSION_BUDGET) -> Fraction:
    return tower_expand(s, budget) if isinstance(s, TowerValue) else Fraction(s)


def scalar_mul(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, TowerValue) and isinstance(b, TowerValue):
        if a.height == b.height and a.sign == -b.sign:
            return a.mantissa * b.mantissa
        raise ValueError("product of two unrelated tower scalars is not representable")
    if isinstance(a, TowerValue):
        a, b = b, a
    if isinstance(b, TowerValue):
        a = Fraction(a)
        return Fraction(0) if a == 0 else TowerValue(a * b.mantissa, b.height, b.sign)
    return Fraction(a) * Fraction(b)


def scalar_add(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, TowerValue) or isinstance(b, TowerValue):
        if not isinstance(b, TowerValue) and b == 0:
            return a
        if not isinstance(a, TowerValue) and a == 0:
            return b
        raise ValueError("sum involving a tower scalar is not representable")
    return Fraction(a) + Fraction(b)


def _as_scalar(s) -> Scalar:
    return s if isinstance(s, TowerValue) else Fraction(s)


@dataclass(frozen=True)
class RationalMap:
    arity: int
    components: Tuple[RatFunc, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        for i, c in enumerate(self.components):
            if c.den.is_zero():
                raise ValueError(f"component {i} has a zero denominator")
            if any(v >= self.arity for v in c.num.variables() | c.den.variables()):
                raise ValueError(f"component {i} uses a variable beyond the source arity")

    @classmethod
    def identity(cls, n: int) -> "RationalMap":
        return cls(n, tuple(RatFunc.var(i) for i in range(n)))

    @property
    def out_arity(self) -> int:
        return len(self.components)

    def apply(self, point: Sequence, stage: str = "") -> List[Fraction]:
        point = [Fraction(p) for p in point]
        if len(point) != self.arity:
            raise ArityMismatch(f"point has {len(point)} coordinates, map expects {self.arity}")
        out = []
        # evaluate each distinct denominator once
        den_cache: Dict[Polynomial, Fraction] = {}
        for i, c in enumerate(self.components):
            d = den_cache.get(c.den)
            if d is None:
                d = den_cache[c.den] = c.den.evaluate(point)
            if d == 0:
                raise DomainError(i, stage)
            out.append(c.num.evaluate(point) / d)
        return out

    def then(self, outer: "RationalMap") -> "RationalMap":
        """outer o self, composed symbolically."""
        if outer.arity != self.out_arity:
            raise ArityMismatch(f"cannot compose: outer expects {outer.arity}, inner yields {self.out_arity}")
        subs = dict(enumerate(self.components))
        return RationalMap(self.arity, tuple(c.substitute(subs) for c in outer.components))


@dataclass(frozen=True)
class DeferredMap:
    """A forward map whose coefficients involve tower constants too large to expand.

    ``build`` materializes the map under an expansion budget and raises
    TowerBudgetError when the towers exceed it.
    """

    arity: int
    out_arity: int
    towers: Tuple[TowerValue, ...]
    build: Callable[[int], RationalMap] = field(compare=False)

    def materialize(self, budget: int = DEFAULT_EXPANSION_BUDGET) -> RationalMap:
        for t in self.towers:
            tower_expand(t, budget)
        return self.build(budget)

    def apply(self, point: Sequence, stage: str = "") -> List[Fraction]:
        return self.materialize().apply(point, stage)

    def then(self, outer: "ForwardMap") -> "DeferredMap":
        if outer.arity != self.out_arity:
            raise ArityMismatch(f"cannot compose: outer expects {outer.arity}, inner yields {self.out_arity}")
        inner = self
        towers = self.towers + (outer.towers if isinstance(outer, DeferredMap) else ())

        def build(budget: int) -> RationalMap:
            o = outer.materialize(budget) if isinstance(outer, DeferredMap) else outer
            return inner.materialize(budget).then(o)

        return DeferredMap(self.arity, outer.out_arity, towers, build)


ForwardMap = Union[RationalMap, DeferredMap]


def _then(inner: ForwardMap, outer: ForwardMap) -> ForwardMap:
    if isinstance(outer, DeferredMap) and isinstance(inner, RationalMap):
        lazy = DeferredMap(inner.arity, inner.out_arity, (), lambda budget: inner)
        return lazy.then(outer)
    return inner.then(outer)


@dataclass(frozen=True)
class AffineProjection:
    """x_j = scale[j] * w[proj[j]] + offset[j]."""

    proj: Tuple[int, ...]
    scale: Tuple[Scalar, ...]
    offset: Tuple[Scalar, ...]

    def __post_init__(self):
        object.__setattr__(self, "proj", tuple(self.proj))
        object.__setattr__(self, "scale", tuple(_as_scalar(s) for s in self.scale))
        object.__setattr__(self, "offset", tuple(_as_scalar(b) for b in self.offset))
        if len(set(self.proj)) != len(self.proj):
            raise ValueError("projection indices repeat")
        if not len(self.proj) == len(self.scale) == len(self.offset):
            raise ValueError("projection, scale and offset lengths differ")
        if any(not isinstance(s, TowerValue) and s == 0 for s in self.scale):
            raise ValueError("affine scale must be nonzero")

    @classmethod
    def projection(cls, proj: Sequence[int]) -> "AffineProjection":
        k = len(proj)
        return cls(tuple(proj), (Fraction(1),) * k, (Fraction(0),) * k)

    @classmethod
    def identity(cls, n: int) -> "AffineProjection":
        return cls.projection(range(n))

    @property
    def out_arity(self) -> int:
        return len(self.proj)

    def apply(self, point: Sequence, budget: int = DEFAULT_EXPANSION_BUDGET) -> List[Fraction]:
        point = [Fraction(p) for p in point]
        if self.proj and max(self.proj) >= len(point):
            raise ArityMismatch(f"projection index {max(self.proj)} beyond point of length {len(point)}")
        return [
            scalar_value(a, budget) * point[i] + scalar_value(b, budget)
            for i, a, b in zip(self.proj, self.scale, self.offset)
        ]

    def after(self, outer: "AffineProjection") -> "AffineProjection":
        """self o outer: first apply outer (target -> middle), then self (middle -> source)."""
        if self.proj and max(self.proj) >= outer.out_arity:
            raise ArityMismatch("backward maps do not chain")
        proj, scale, offset = [], [], []
        for j, i in enumerate(self.proj):
            a_i = self.scale[j]
            proj.append(outer.proj[i])
            scale.append(scalar_mul(a_i, outer.scale[i]))
            offset.append(scalar_add(scalar_mul(a_i, outer.offset[i]), self.offset[j]))
        return AffineProjection(tuple(proj), tuple(scale), tuple(offset))


def is_projection_affine(obj) -> bool:
    """Mechanical check that a backward map has the projection-plus-affine form."""
    if isinstance(obj, dict):
        try:
            obj = backward_from_json(obj)
        except (KeyError, TypeError, ValueError):
            return False
    if not isinstance(obj, AffineProjection):
        return False
    ok_scale = all(isinstance(a, (Fraction, TowerValue)) for a in obj.scale)
    ok_off = all(isinstance(b, (Fraction, TowerValue)) for b in obj.offset)
    return ok_scale and ok_off and len(set(obj.proj)) == len(obj.proj)


@dataclass(frozen=True)
class WitnessMap:
    forward: ForwardMap
    backward: AffineProjection
    stage: str = ""
    equisat_only: bool = False
    bound: Optional[Fraction] = None

    @classmethod
    def identity(cls, n: int, stage: str = "identity") -> "WitnessMap":
        return cls(RationalMap.identity(n), AffineProjection.identity(n), stage)

    @property
    def source_arity(self) -> int:
        return self.forward.arity

    @property
    def target_arity(self) -> int:
        return self.forward.out_arity

    def apply(self, point: Sequence) -> List[Fraction]:
        if self.bound is not None and any(abs(Fraction(p)) > self.bound for p in point):
            raise OutOfBound(self.stage, self.bound)
        return self.forward.apply(point, self.stage)

    def invert(self, point: Sequence) -> List[Fraction]:
        return self.backward.apply(point)


class OutOfBound(ValueError):
    def __init__(self, stage: str, bound: Fraction):
        super().__init__(f"witness out of constructed bound (|x| <= {format_rational(bound)}, stage {stage})")
        self.bound = bound


def compose(outer: WitnessMap, inner: WitnessMap) -> WitnessMap:
    """The witness of running ``inner`` then ``outer``."""
    if outer.source_arity != inner.target_arity:
        raise ArityMismatch(
            f"cannot compose {outer.stage or 'outer'} (arity {outer.source_arity}) after "
            f"{inner.stage or 'inner'} (arity {inner.target_arity})"
        )
    stage = "+".join(s for s in (inner.stage, outer.stage) if s)
    return WitnessMap(
        _then(inner.forward, outer.forward),
        inner.backward.after(outer.backward),
        stage,
        inner.equisat_only or outer.equisat_only,
        # a later stage's bound is on its own inputs; applying it to ours is only
        # exact when the coordinates it bounds are carried through unchanged
        inner.bound if inner.bound is not None else outer.bound,
    )


def compose_all(maps: Sequence[WitnessMap], n: int) -> WitnessMap:
    acc = WitnessMap.identity(n, "")
    for w in maps:
        acc = compose(w, acc)
    return acc


# -- round trips ------------------------------------------------------------


@dataclass
class PointResult:
    point: Tuple[Fraction, ...]
    forward_ok: bool
    backward_ok: Optional[bool]
    message: str = ""


@dataclass
class RoundTripReport:
    stage: str
    equisat_only: bool
    results: List[PointResult] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(1 for r in self.results if not r.forward_ok or r.backward_ok is False)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def summary(self) -> str:
        note = " (backward checks skipped: equisatisfiable only)" if self.equisat_only else ""
        return f"{self.stage}: {len(self.results) - self.failures}/{len(self.results)} points pass{note}"


def round_trip_check(
    w: WitnessMap, source: Instance, target: Instance, points: Sequence[Sequence]
) -> RoundTripReport:
    report = RoundTripReport(w.stage, w.equisat_only)
    if w.target_arity != target.n:
        report.results.append(
            PointResult((), False, None, f"forward map has {w.target_arity} components, target has {target.n} variables")
        )
        return report
    for p in points:
        p = tuple(Fraction(v) for v in p)
        try:
            image = w.apply(p)
        except (ZeroDivisionError, OutOfBound) as exc:
            report.skipped.append(f"{[format_rational(v) for v in p]}: {exc}")
            continue
        bad = failing_constraints(target, image)
        msg = ""
        if bad:
            parts = ["range [1/2,2]" if i < 0 else f"constraint {i}" for i in bad[:5]]
            comps = sorted({v for i in bad if i >= 0 for v in target.constraints[i].variables()})
            named = ", ".join(target.names[v] for v in comps[:8])
            msg = f"forward image violates {', '.join(parts)} (components {named})"
        back_ok = None
        if not w.equisat_only:
            back_ok = list(w.invert(image)) == list(p)
            if not back_ok:
                msg = (msg + "; " if msg else "") + "backward(forward(x)) != x"
        report.results.append(PointResult(p, not bad, back_ok, msg))
    return report


# -- JSON -------------------------------------------------------------------


def _scalar_json(s: Scalar):
    if isinstance(s, TowerValue):
        return {"mantissa": format_rational(s.mantissa), "height": s.height, "sign": s.sign}
    return format_rational(s)


def _scalar_from_json(obj) -> Scalar:
    if isinstance(obj, dict):
        return TowerValue(parse_rational(obj["mantissa"]), int(obj["height"]), int(obj["sign"]))
    return parse_rational(obj)


def _poly_json(p: Polynomial, names: Sequence[str]) -> str:
    return p.to_text(names)


def backward_to_json(b: AffineProjection) -> dict:
    return {
        "proj": list(b.proj),
        "scale": [_scalar_json(a) for a in b.scale],
        "offset": [_scalar_json(x) for x in b.offset],
    }


def backward_from_json(obj: dict) -> AffineProjection:
    proj = obj["proj"]
    if not all(isinstance(i, int) and i >= 0 for i in proj):
        raise ValueError("projection indices must be nonnegative integers")
    return AffineProjection(
        tuple(proj),
        tuple(_scalar_from_json(a) for a in obj["scale"]),
        tuple(_scalar_from_json(b) for b in obj["offset"]),
    )


def witness_to_json(w: WitnessMap, source_names: Sequence[str] | None = None) -> dict:
    names = list(source_names) if source_names is not None else [f"x{i}" for i in range(w.source_arity)]
    out = {"stage": w.stage, "equisat_only": w.equisat_only, "arity": w.source_arity}
    if isinstance(w.forward, DeferredMap):
        out["forward"] = None
        out["deferred"] = {
            "components": w.forward.out_arity,
            "towers": [_scalar_json(t) for t in w.forward.towers],
        }
    else:
        out["forward"] = [
            {"num": c.num.to_text(names), "den": c.den.to_text(names)} for c in w.forward.components
        ]
    out["backward"] = backward_to_json(w.backward)
    if w.bound is not None:
        out["bound"] = format_rational(w.bound)
    out["source_vars"] = names
    return out


def witness_from_json(obj: dict) -> WitnessMap:
    from .parser import parse_polynomial  # local: parser imports formula, not witness

    names = obj.get("source_vars") or [f"x{i}" for i in range(int(obj["arity"]))]
    arity = int(obj.get("arity", len(names)))
    backward = backward_from_json(obj["backward"])
    if obj.get("forward") is None:
        towers = tuple(_scalar_from_json(t) for t in obj["deferred"]["towers"])

        def refuse(budget: int) -> RationalMap:
            raise ValueError("deferred forward map cannot be rebuilt from JSON")

        fwd: ForwardMap = DeferredMap(arity, int(obj["deferred"]["components"]), towers, refuse)
    else:
        comps = []
        for c in obj["forward"]:
            num = parse_polynomial(c["num"], names)
            den = parse_polynomial(c["den"], names)
            if den.is_zero():
                raise ValueError("forward component with zero denominator")
            comps.append(RatFunc(num, den))
        fwd = RationalMap(arity, tuple(comps))
    bound = parse_rational(obj["bound"]) if "bound" in obj else None
    return WitnessMap(fwd, backward, obj.get("stage", ""), bool(obj.get("equisat_only", False)), bound)
