"""Shared machinery for the lowering passes: fresh names, output assembly,
forward-map bookkeeping and pass reports."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

from ..formula import (
    Constraint,
    Fragment,
    Instance,
    Interval,
    Var,
    VarAnnotation,
    formula_length,
)
from ..polynomial import Polynomial, RatFunc
from ..witness import AffineProjection, RationalMap, WitnessMap


class PassError(ValueError):
    """A pass precondition does not hold."""


class GadgetCertificationError(PassError):
    pass


@dataclass(frozen=True)
class TowerMode:
    """``height=None`` selects the paper-exact tower height; an int overrides it."""

    height: Optional[int] = None

    @classmethod
    def paper(cls) -> "TowerMode":
        return cls(None)

    @classmethod
    def test(cls, height: int) -> "TowerMode":
        if height < 0:
            raise ValueError("tower height must be >= 0")
        return cls(height)

    @property
    def exact(self) -> bool:
        return self.height is None

    @classmethod
    def parse(cls, text: str) -> "TowerMode":
        if text == "paper":
            return cls.paper()
        if text.startswith("test:"):
            return cls.test(int(text[5:]))
        raise ValueError(f"tower mode must be 'paper' or 'test:N', got {text!r}")

    def __str__(self) -> str:
        return "paper" if self.exact else f"test:{self.height}"


@dataclass
class PassReport:
    stage: str
    input_length: int
    output_length: int
    new_vars: int
    constraints: int
    tower_height: int = 0
    seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.output_length / max(1, self.input_length + self.tower_height)

    def to_json(self) -> dict:
        out = {
            "stage": self.stage,
            "input_length": self.input_length,
            "output_length": self.output_length,
            "new_vars": self.new_vars,
            "constraints": self.constraints,
            "tower_height": self.tower_height,
            "seconds": round(self.seconds, 6),
        }
        out.update(self.extra)
        return out


class NameGen:
    def __init__(self, reserved: Iterable[str] = ()):
        self.used = set(reserved)
        self.counters: Dict[str, int] = {}

    def fresh(self, prefix: str) -> str:
        k = self.counters.get(prefix, 0)
        while True:
            k += 1
            name = f"{prefix}{k}"
            if name not in self.used:
                break
        self.counters[prefix] = k
        self.used.add(name)
        return name

    def reserve(self, name: str) -> str:
        if name in self.used:
            raise ValueError(f"name {name!r} already taken")
        self.used.add(name)
        return name


class Builder:
    """Accumulates output variables, constraints and the forward map."""

    def __init__(self, fragment: Fragment, source_arity: int, reserved: Iterable[str] = ()):
        self.fragment = fragment
        self.source_arity = source_arity
        self.names = NameGen(reserved)
        self.vars: List[Var] = []
        self.forward: List[RatFunc] = []
        self.constraints: List[Constraint] = []

    def add_var(
        self,
        name: str,
        forward: RatFunc | Polynomial,
        interval: Interval | None = None,
        annotation: VarAnnotation | None = None,
        label: str | None = None,
    ) -> int:
        if not isinstance(forward, RatFunc):
            forward = RatFunc(forward)
        self.vars.append(Var(name, interval, annotation, label))
        self.forward.append(forward)
        return len(self.vars) - 1

    def fresh(self, prefix: str, forward, label: str | None = None, **kw) -> int:
        return self.add_var(self.names.fresh(prefix), forward, label=label, **kw)

    def add(self, c: Constraint) -> None:
        self.constraints.append(c)

    def set_var(self, idx: int, **changes) -> None:
        v = self.vars[idx]
        self.vars[idx] = Var(
            changes.get("name", v.name),
            changes.get("interval", v.interval),
            changes.get("annotation", v.annotation),
            changes.get("label", v.label),
        )

    def instance(self, delta=None, source_delta=None, inherited: Sequence[int] = ()) -> Instance:
        return Instance(
            self.fragment,
            tuple(self.vars),
            tuple(self.constraints),
            None,
            delta,
            source_delta,
            tuple(inherited),
        )

    def forward_map(self) -> RationalMap:
        return RationalMap(self.source_arity, tuple(self.forward))


def projection_witness(stage: str, forward: RationalMap, n_source: int, proj: Sequence[int] | None = None,
                       scale=None, offset=None) -> WitnessMap:
    proj = tuple(range(n_source)) if proj is None else tuple(proj)
    scale = (Fraction(1),) * len(proj) if scale is None else tuple(scale)
    offset = (Fraction(0),) * len(proj) if offset is None else tuple(offset)
    return WitnessMap(forward, AffineProjection(proj, scale, offset), stage)


def make_report(stage: str, source: Instance, target: Instance, started: float, tower_height: int = 0,
                **extra) -> PassReport:
    return PassReport(
        stage,
        formula_length(source),
        formula_length(target),
        max(0, target.n - source.n),
        len(target.constraints),
        tower_height,
        time.perf_counter() - started,
        dict(extra),
    )
