"""The ``etr`` command.

Exit codes: 0 ok, 1 verification failure, 2 input or flag error, 3 range
certification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from .formula import Fragment, Instance, Interval, etr_instance, evaluate, validate_fragment
from .oracle import GridCapExceeded, GridSpec, empirical_range, generate_planted, sample_solutions
from .parser import (
    InstanceFormatError,
    ParseError,
    formula_to_json,
    instance_to_dict,
    parse_etr,
    parse_instance,
    print_etr,
    print_instance,
)
from .pipeline import StageError, pipeline
from .ranges import BoundError, MissingAnnotation, certify_instance
from .rational import RationalFormatError, format_rational, parse_rational
from .reductions.builder import GadgetCertificationError, PassError, TowerMode
from .witness import round_trip_check, witness_from_json, witness_to_json

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_CERT = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT, **detail):
        super().__init__(message)
        self.code = code
        self.detail = detail


class Diagnostics:
    def __init__(self, as_json: bool):
        self.as_json = as_json

    def error(self, message: str, code: int, **detail) -> None:
        if self.as_json:
            print(json.dumps({"level": "error", "code": code, "message": message, **detail}, ensure_ascii=False),
                  file=sys.stderr)
        else:
            print(f"error: {message}", file=sys.stderr)

    def note(self, message: str, **detail) -> None:
        if self.as_json:
            print(json.dumps({"level": "info", "message": message, **detail}, ensure_ascii=False), file=sys.stderr)
        else:
            print(message, file=sys.stderr)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except RationalFormatError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _six(text: str) -> List[Fraction]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 6:
        raise argparse.ArgumentTypeError("expected six comma-separated rationals")
    return [_rational(p) for p in parts]


def _tower(text: str) -> TowerMode:
    try:
        return TowerMode.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fragment(text: str) -> Fragment:
    try:
        return Fragment(text.upper())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown fragment {text!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _load_source(path: str) -> Instance:
    """A .etr formula file or an instance JSON file."""
    text = _read(path)
    if path.endswith(".json"):
        return _load_instance_text(text, path)
    try:
        node, table = parse_etr(text)
    except ParseError as exc:
        raise CliError(f"{path}: {exc}") from None
    return etr_instance(node, table)


def _load_instance_text(text: str, path: str) -> Instance:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return parse_instance(text)
    except (InstanceFormatError, RationalFormatError, ParseError) as exc:
        raise CliError(f"{path}: {exc}") from None


def _load_points(path: str) -> List[List[Fraction]]:
    try:
        obj = json.loads(_read(path))
        if isinstance(obj, dict):
            obj = obj.get("solutions", [])
        # integers may appear as bare JSON numbers; floats are rejected as inexact
        return [[Fraction(x) if isinstance(x, int) else parse_rational(x) for x in p] for p in obj]
    except (json.JSONDecodeError, RationalFormatError, TypeError) as exc:
        raise CliError(f"{path}: malformed sample file: {exc}") from None


def _points_json(points) -> list:
    return [[format_rational(x) for x in p] for p in points]


# -- subcommands -------------------------------------------------------------------


def cmd_reduce(args, diag: Diagnostics) -> int:
    target = args.to
    if target.has_delta and args.delta2 is None:
        raise CliError(f"--delta2 is required for target {target.value}")
    source = _load_source(args.input)
    if source.fragment is not Fragment.ETR:
        raise CliError("reduce expects an ETR formula as input")
    try:
        result = pipeline(source.formula, target, args.delta2, args.tower, args.assume_compact, source.table)
    except StageError as exc:
        code = EXIT_CERT if isinstance(exc.cause, GadgetCertificationError) else EXIT_INPUT
        raise CliError(str(exc.cause), code, stage=exc.stage) from None
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "instance.json").write_text(print_instance(result.instance) + "\n")
    wj = witness_to_json(result.witness, source.names)
    wj["stages"] = [w.stage for w in result.witnesses]
    (out / "witness.json").write_text(json.dumps(wj, indent=1, ensure_ascii=False) + "\n")
    with open(out / "reports.jsonl", "w") as fh:
        for rep in result.reports:
            fh.write(json.dumps(rep.to_json()) + "\n")
    diag.note(
        f"{target.value}: {result.instance.n} variables, {len(result.instance.constraints)} constraints",
        stages=[r.stage for r in result.reports],
    )
    return EXIT_OK


def cmd_verify(args, diag: Diagnostics) -> int:
    source = _load_source(args.source)
    target = _load_instance_text(_read(args.target), args.target)
    try:
        witness = witness_from_json(json.loads(_read(args.witness)))
    except (json.JSONDecodeError, KeyError, ValueError, TypeError, ParseError) as exc:
        raise CliError(f"{args.witness}: malformed witness: {exc}") from None
    if args.samples:
        points = _load_points(args.samples)
    else:
        points = []
    for p in points:
        if len(p) != source.n:
            raise CliError(f"sample {p} has {len(p)} coordinates, source has {source.n} variables")
    ok = True
    lines = []
    problems = validate_fragment(target)
    lines.append(("validate", not problems, str(problems[0]) if problems else ""))
    bad_samples = [p for p in points if not evaluate(source, p)]
    if bad_samples:
        lines.append(("samples", False, f"{len(bad_samples)} sample points do not satisfy the source"))
    try:
        rt = round_trip_check(witness, source, target, points)
    except ValueError as exc:
        rt = None
        lines.append(("round-trip", False, str(exc)))
    if rt is not None:
        detail = "; ".join(r.message for r in rt.results if r.message)[:400]
        if rt.equisat_only:
            detail = (detail + "; " if detail else "") + "backward checks skipped (equisatisfiable only)"
        lines.append(("round-trip", rt.ok, rt.summary() + (f": {detail}" if detail else "")))
        if rt.skipped:
            lines.append(("skipped", True, f"{len(rt.skipped)} points skipped (denominator or bound)"))
    if target.fragment.ranged:
        try:
            cert = certify_instance(target)
            lines.append(("certify", cert.ok, f"{len(cert.failures)} variables fail" if not cert.ok else ""))
        except (BoundError, MissingAnnotation) as exc:
            lines.append(("certify", False, str(exc)))
    for name, passed, detail in lines:
        ok &= passed
        if args.json:
            print(json.dumps({"check": name, "pass": passed, "detail": detail}))
        else:
            print(f"{'PASS' if passed else 'FAIL'} {name}" + (f"  {detail}" if detail else ""))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_certify(args, diag: Diagnostics) -> int:
    inst = _load_instance_text(_read(args.instance), args.instance)
    try:
        report = certify_instance(inst, args.delta_source)
    except (BoundError, MissingAnnotation) as exc:
        raise CliError(str(exc), EXIT_CERT) from None
    print(json.dumps(report.to_json(), indent=1, ensure_ascii=False))
    return EXIT_OK if report.ok else EXIT_CERT


def cmd_oracle(args, diag: Diagnostics) -> int:
    if args.oracle_cmd == "range":
        try:
            iv = empirical_range(args.p, args.q, args.delta, args.grid)
        except ZeroDivisionError as exc:
            raise CliError(str(exc)) from None
        print(json.dumps([format_rational(iv.lo), format_rational(iv.hi)]))
        return EXIT_OK
    if args.oracle_cmd == "sample":
        inst = _load_source(args.input)
        try:
            grid = GridSpec(tuple(Interval(args.lo, args.hi) for _ in range(inst.n)), args.points)
        except (GridCapExceeded, ValueError) as exc:
            raise CliError(str(exc)) from None
        print(json.dumps(_points_json(sample_solutions(inst, grid))))
        return EXIT_OK
    planted = generate_planted(args.seed, args.size, args.fragment, args.delta)
    obj = {"instance": instance_to_dict(planted.instance), "solutions": _points_json(planted.solutions)}
    if planted.instance.fragment is Fragment.ETR and planted.instance.formula is not None:
        obj["formula"] = print_etr(planted.instance.formula, planted.instance.names)
    text = json.dumps(obj, indent=1, ensure_ascii=False)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_parse(args, diag: Diagnostics) -> int:
    try:
        node, table = parse_etr(_read(args.input))
    except ParseError as exc:
        raise CliError(f"{args.input}: {exc}") from None
    if args.json:
        print(json.dumps({"vars": list(table.names), "formula": formula_to_json(node, table.names)}, indent=1))
    else:
        print(print_etr(node, table.names))
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output and diagnostics")

    p = argparse.ArgumentParser(prog="etr", description="Lower ETR formulas through the fragment chain.")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("reduce", parents=[common], help="compile a formula to a target fragment")
    r.add_argument("input")
    r.add_argument("outdir")
    r.add_argument("--to", type=_fragment, required=True)
    r.add_argument("--delta2", type=_rational, help="delta of the target range fragment")
    r.add_argument("--tower", type=_tower, default=TowerMode.paper(), help="'paper' or 'test:N'")
    r.add_argument("--assume-compact", action="store_true", help="skip the bounding step")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", parents=[common], help="round-trip a witness over sample points")
    v.add_argument("--source", required=True, help=".etr formula or instance JSON")
    v.add_argument("--target", required=True)
    v.add_argument("--witness", required=True)
    v.add_argument("--samples", help="JSON array of points (or a planted file with 'solutions')")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("certify", parents=[common], help="range-certify an instance")
    c.add_argument("instance")
    c.add_argument("--delta-source", type=_rational, default=None)
    c.set_defaults(func=cmd_certify)

    o = sub.add_parser("oracle", help="brute-force ground truth")
    osub = o.add_subparsers(dest="oracle_cmd", required=True)
    orng = osub.add_parser("range", parents=[common])
    orng.add_argument("--p", type=_six, required=True)
    orng.add_argument("--q", type=_six, default=[Fraction(0)] * 5 + [Fraction(1)])
    orng.add_argument("--delta", type=_rational, required=True)
    orng.add_argument("--grid", type=int, default=41)
    osam = osub.add_parser("sample", parents=[common])
    osam.add_argument("input")
    osam.add_argument("--lo", type=_rational, default=Fraction(-2))
    osam.add_argument("--hi", type=_rational, default=Fraction(2))
    osam.add_argument("--points", type=int, default=9)
    opl = osub.add_parser("plant", parents=[common])
    opl.add_argument("--fragment", type=_fragment, default=Fragment.ETR)
    opl.add_argument("--seed", type=int, default=0)
    opl.add_argument("--size", type=int, default=8)
    opl.add_argument("--delta", type=_rational, default=None)
    opl.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    pa = sub.add_parser("parse", parents=[common], help="parse and print a formula")
    pa.add_argument("input")
    pa.set_defaults(func=cmd_parse)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    diag = Diagnostics(getattr(args, "json", False))
    try:
        return args.func(args, diag)
    except CliError as exc:
        diag.error(str(exc), exc.code, **exc.detail)
        return exc.code
    except (PassError, ValueError) as exc:
        diag.error(str(exc), EXIT_INPUT)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
