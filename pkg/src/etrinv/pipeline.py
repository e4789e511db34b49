"""Running the whole lowering chain with one delta knob.

The user picks the target fragment and the delta of that fragment; the deltas
of the earlier range stages are derived backwards by the fixed ratios 1800, 10
and 5, rounding the small-box delta down to a power of two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from .formula import (
    CHAIN,
    Conj,
    Fragment,
    FormulaNode,
    Instance,
    VarTable,
    etr_instance,
    validate_fragment,
)
from .rational import floor_power_of_two, format_rational, is_dyadic
from .reductions.ami import to_ami
from .reductions.builder import PassError, PassReport, TowerMode
from .reductions.compact import compactify
from .reductions.conj import to_conj
from .reductions.inv import INV_RATIO, to_inv
from .reductions.shift import to_shift
from .reductions.small import to_small
from .reductions.square import SQUARE_RATIO, to_square
from .witness import WitnessMap, compose

SHIFT_RATIO = 5
DEFAULT_DELTA = Fraction(1, 8)


class StageError(Exception):
    """A pass failed; ``stage`` names it and ``cause`` is the original error."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


def derive_deltas(target: Fragment, delta) -> Dict[Fragment, Fraction]:
    """Delta of every range stage up to ``target``, given the target's delta."""
    delta = Fraction(delta)
    out: Dict[Fragment, Fraction] = {}
    if target is Fragment.INV:
        out[Fragment.INV] = delta
        delta = delta / INV_RATIO
        target = Fragment.SQUARE
    if target is Fragment.SQUARE:
        out[Fragment.SQUARE] = delta
        delta = delta / SQUARE_RATIO
        target = Fragment.SHIFT
    if target is Fragment.SHIFT:
        out[Fragment.SHIFT] = delta
        if not 0 < delta <= 1:
            raise PassError(f"δ must lie in (0,1], got {format_rational(delta)}")
        delta = floor_power_of_two(delta / SHIFT_RATIO)
        target = Fragment.SMALL
    if target is Fragment.SMALL:
        if not is_dyadic(delta):
            raise PassError(f"SMALL δ must be dyadic, got {format_rational(delta)}")
        out[Fragment.SMALL] = delta
    return out


@dataclass
class PipelineResult:
    instance: Instance
    witness: WitnessMap
    reports: List[PassReport]
    stages: List[Tuple[str, Instance]] = field(default_factory=list)
    witnesses: List[WitnessMap] = field(default_factory=list)

    @property
    def equivalent(self) -> bool:
        """Rational equivalence holds end to end (no compactification step)."""
        return not self.witness.equisat_only


def _run(stage: str, fn, *args):
    try:
        return fn(*args)
    except Exception as exc:  # annotated and re-raised
        raise StageError(stage, exc) from exc


def pipeline(
    formula: FormulaNode | str,
    target: Fragment | str = Fragment.INV,
    delta=None,
    mode: TowerMode = TowerMode.paper(),
    assume_compact: bool = False,
    names: VarTable | None = None,
) -> PipelineResult:
    """Lower ``formula`` to ``target``.

    With a Test tower of height h, compactification uses h and the small-box
    scaling uses h + 1 so the scaled bounded solutions land inside [-δ, δ].
    """
    target = Fragment(target.upper()) if isinstance(target, str) else Fragment(target)
    if isinstance(formula, str):
        from .parser import parse_etr

        formula, names = parse_etr(formula)
    if names is None:
        names = VarTable()
    source = etr_instance(formula, names)
    deltas = derive_deltas(target, DEFAULT_DELTA if delta is None else delta) if target.has_delta else {}

    inst = source
    stages: List[Tuple[str, Instance]] = [("etr", source)]
    reports: List[PassReport] = []
    witnesses: List[WitnessMap] = []

    def step(stage: str, fn, *args):
        nonlocal inst
        out, w, rep = _run(stage, fn, inst, *args)
        problems = validate_fragment(out)
        if problems:
            raise StageError(stage, PassError(f"output fails validation: {problems[0]}"))
        inst = out
        stages.append((stage, out))
        reports.append(rep)
        witnesses.append(w)

    order = CHAIN.index(target)
    if target is not Fragment.ETR:
        step("conj", to_conj)
    if order >= CHAIN.index(Fragment.AMI):
        if not assume_compact and inst.n > 0:
            step("compact", compactify, mode)
        step("ami", to_ami)
    if order >= CHAIN.index(Fragment.SMALL):
        small_mode = mode if mode.exact else TowerMode.test(mode.height + 1)
        step("small", to_small, deltas[Fragment.SMALL], small_mode)
    if order >= CHAIN.index(Fragment.SHIFT):
        step("shift", to_shift, deltas[Fragment.SHIFT])
    if order >= CHAIN.index(Fragment.SQUARE):
        step("square", to_square, deltas[Fragment.SQUARE])
    if order >= CHAIN.index(Fragment.INV):
        step("inv", to_inv, deltas[Fragment.INV])

    composed = WitnessMap.identity(source.n, "")
    for w in witnesses:
        composed = compose(w, composed)
    return PipelineResult(inst, composed, reports, stages, witnesses)


def empty_pipeline(target: Fragment | str = Fragment.INV, **kw) -> PipelineResult:
    return pipeline(Conj(()), target, **kw)
