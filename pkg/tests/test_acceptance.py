"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import random
import time
from fractions import Fraction
from functools import lru_cache


from etrinv.formula import (
    Fragment,
    etr_instance,
    evaluate,
    failing_constraints,
    formula_length,
    validate_fragment,
)
from etrinv.ladder import FROZEN_RATIO_BOUNDS, LADDER_PASSES, measure, non_increasing, shift_block, square_block
from etrinv.oracle import empirical_range, generate_planted, random_formula
from etrinv.parser import print_etr, tokenize
from etrinv.pipeline import derive_deltas, pipeline
from etrinv.ranges import bound_case_a, bound_rational, certify_instance, required_delta_case_b
from etrinv.reductions import (
    PassError,
    TowerMode,
    compactify,
    paper_tower_height,
    to_ami,
    to_conj,
    to_inv,
    to_shift,
    to_small,
    to_square,
)
from etrinv.reductions.gadgets import annotation_from, inv_square_identity, inv_square_solution, square_times_identity
from etrinv.reductions.gadgets import INV_SQUARE_INPUTS, INV_SQUARE_OUTPUT, check_program_consistency
from etrinv.reductions.gadgets import INV_SQUARE_GADGET, SQUARE_TIMES_GADGET, square_times_solution
from etrinv.reductions.inv import INV_COEF_BOUND, INV_RATIO, check_inv_gadget
from etrinv.reductions.shift import check_shift_parameters
from etrinv.reductions.square import SQUARE_RATIO
from etrinv.polynomial import Polynomial, RatFunc
from etrinv.witness import is_projection_affine, round_trip_check, witness_to_json

from conftest import ACCEPTANCE_LINES, TORUS

PLANTED_PER_PASS = 100
PLANTED_SIZE = 8
INV_DELTAS = derive_deltas(Fragment.INV, Fraction(1, 8))


def report(n, ok, detail=""):
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
    print("\n" + line)
    ACCEPTANCE_LINES.append(line)
    assert ok, detail


# Each entry: pass name -> list of (planted source, output instance, witness).
# The range stages use the deltas derived back from INV with delta2 = 1/8.
PASS_SETUP = {
    "conj": ("etr", None, lambda s: to_conj(s)),
    "compact": ("conj", None, lambda s: compactify(s, TowerMode.test(3))),
    "ami": ("conj", None, lambda s: to_ami(s)),
    "small": ("ami", None, lambda s: to_small(s, Fraction(1, 64), TowerMode.test(2))),
    "shift": ("small", INV_DELTAS[Fragment.SMALL], lambda s: to_shift(s, INV_DELTAS[Fragment.SHIFT])),
    "square": ("shift", INV_DELTAS[Fragment.SHIFT], lambda s: to_square(s, INV_DELTAS[Fragment.SQUARE])),
    "inv": ("square", INV_DELTAS[Fragment.SQUARE], lambda s: to_inv(s, INV_DELTAS[Fragment.INV])),
}


@lru_cache(maxsize=None)
def planted_runs(name):
    frag, delta, run = PASS_SETUP[name]
    out = []
    for seed in range(PLANTED_PER_PASS):
        planted = generate_planted(seed, PLANTED_SIZE, frag, delta)
        inst, w, _ = run(planted.instance)
        out.append((planted, inst, w))
    return out


def test_criterion_1_fragment_soundness():
    started = time.perf_counter()
    bad = []
    longest = 0
    for seed in range(500):
        node, names = random_formula(seed, max_tokens=40)
        toks = [t for t in tokenize(print_etr(node, names)) if t.kind not in ("ws", "comment", "eof")]
        longest = max(longest, len(toks))
        out, _, _ = to_conj(etr_instance(node, names))
        if validate_fragment(out, Fragment.CONJ):
            bad.append(f"random seed {seed}")
    targets = {"conj": Fragment.CONJ, "compact": Fragment.CONJ, "ami": Fragment.AMI, "small": Fragment.SMALL,
               "shift": Fragment.SHIFT, "square": Fragment.SQUARE, "inv": Fragment.INV}
    for name, frag in targets.items():
        for i, (_, inst, _) in enumerate(planted_runs(name)):
            if inst.fragment is not frag or validate_fragment(inst, frag):
                bad.append(f"{name} planted {i}")
    elapsed = time.perf_counter() - started
    ok = not bad and longest <= 40 and elapsed < 60
    report(1, ok, f"500 random + {PLANTED_PER_PASS}x{len(targets)} planted, {len(bad)} invalid, "
                  f"max {longest} tokens, {elapsed:.1f}s" + (f"; first: {bad[0]}" if bad else ""))


def test_criterion_2_witness_round_trip():
    lines = []
    ok = True
    for name in ("conj", "ami", "small", "shift", "square", "inv"):
        points = fails = 0
        for planted, inst, w in planted_runs(name):
            rt = round_trip_check(w, planted.instance, inst, planted.solutions)
            points += len(planted.solutions)
            fails += rt.failures + len(rt.skipped)
        ok &= fails == 0 and points >= PLANTED_PER_PASS
        lines.append(f"{name} {points - fails}/{points}")
    report(2, ok, ", ".join(lines))


def test_criterion_3_linear_extension():
    checked = failed = 0
    maps = []
    for name in PASS_SETUP:
        maps += [w for _, _, w in planted_runs(name)]
    for text, target in [(TORUS, "inv"), ("x*y > 1 \\/ x = 0", "conj"), ("x^2 + y^2 = 1", "inv"),
                         ("not (x = 0) /\\ y >= x", "square")]:
        res = pipeline(text, target, Fraction(1, 8), TowerMode.test(3), assume_compact=(text == TORUS))
        maps += res.witnesses + [res.witness]
    for w in maps:
        checked += 1
        if not (is_projection_affine(w.backward) and is_projection_affine(witness_to_json(w)["backward"])):
            failed += 1
    report(3, failed == 0, f"{checked} backward maps, {failed} not projection-plus-affine")


def test_criterion_4_size_linearity():
    lines = []
    ok = True
    for name in LADDER_PASSES:
        rungs = measure(name)
        worst = max(r.ratio for r in rungs)
        good = worst <= FROZEN_RATIO_BOUNDS[name] and non_increasing(rungs)
        ok &= good
        lines.append(f"{name} max {float(worst):.2f} <= {FROZEN_RATIO_BOUNDS[name]}"
                     f" {'monotone' if non_increasing(rungs) else 'NOT monotone'}")
    report(4, ok, "; ".join(lines))


def _random_six(rng, span):
    return [Fraction(rng.randint(-span, span), rng.randint(1, 4)) for _ in range(6)]


def test_criterion_5_core_value_soundness():
    started = time.perf_counter()
    rng = random.Random(20240101)
    violations = 0
    runs = 0
    for _ in range(200):
        a = _random_six(rng, 8)
        b = [Fraction(rng.randint(-1, 1), rng.randint(1, 4)) for _ in range(5)] + [Fraction(rng.randint(2, 5))]
        for delta in (Fraction(1, 4), Fraction(1, 16), Fraction(1, 256)):
            runs += 1
            if not empirical_range(a, b, delta, 41).within(bound_rational(a, b, delta)):
                violations += 1
    # case (a): q = 1, nonnegative coefficients up to c
    one = [0, 0, 0, 0, 0, 1]
    case_fail = 0
    for _ in range(100):
        a = [Fraction(rng.randint(0, 8), rng.randint(1, 4)) for _ in range(5)] + [Fraction(rng.randint(-3, 3))]
        for delta in (Fraction(1, 4), Fraction(1, 16)):
            if not bound_rational(a, one, delta).within(bound_case_a(a, delta, 8)):
                case_fail += 1
    # case (b): the threshold delta keeps the bound within eps of a6/b6
    for _ in range(100):
        a5 = [rng.randint(-15, 15) for _ in range(5)]
        b5 = [rng.randint(-15, 15) for _ in range(5)]
        a6, b6 = rng.randint(0, 6), rng.randint(1, 9)
        eps = rng.choice([Fraction(1, 7), Fraction(1, 8), Fraction(1, 2)])
        d = required_delta_case_b(eps, 15, a6, b6)
        c = Fraction(a6, b6)
        iv = bound_rational(a5 + [a6], b5 + [b6], d)
        if not (c - eps <= iv.lo and iv.hi <= c + eps):
            case_fail += 1
    elapsed = time.perf_counter() - started
    ok = violations == 0 and case_fail == 0 and elapsed < 30
    report(5, ok, f"{runs} range checks, {violations} violations, {case_fail} case (a)/(b) failures, {elapsed:.1f}s")


def _rejects(fn):
    try:
        fn()
    except PassError:
        return True
    return False


def test_criterion_6_constants():
    checks = {}
    d1 = Fraction(1, 32)
    checks["shift accepts 5δ₁ = δ₂"] = check_shift_parameters(d1, 5 * d1) == 5
    checks["shift rejects 5δ₁ > δ₂"] = _rejects(lambda: check_shift_parameters(d1, 5 * d1 - Fraction(1, 10 ** 6)))
    src = shift_block(2)
    checks["square accepts δ₂/10"] = to_square(src, src.delta * 10)[0].delta == src.delta * SQUARE_RATIO
    checks["square rejects δ₂/9"] = _rejects(lambda: to_square(src, src.delta * 9))
    checks["square rejects δ₂/11"] = _rejects(lambda: to_square(src, src.delta * 11))
    sq = square_block(2)
    checks["inv accepts δ₂/1800"] = to_inv(sq, sq.delta * 1800)[0].delta == sq.delta * INV_RATIO
    checks["inv rejects δ₂/1799"] = _rejects(lambda: to_inv(sq, sq.delta * 1799))
    # worst case over the gadget: a6 <= 6, b6 <= 9, (1 + δ₂) <= 2, coefficients within 15
    worst_den = 5 * INV_COEF_BOUND * (6 + 2 * 9)
    checks["5·15·24 = 1800"] = worst_den == 5 * 15 * 24 == INV_RATIO
    checks["threshold re-derived"] = required_delta_case_b(1, 15, 6, 9) == Fraction(9 * 9, INV_RATIO)
    six = [annotation_from(rf, (0,), primitive=True) for k, rf in inv_square_solution().items()
           if k not in INV_SQUARE_INPUTS and k != INV_SQUARE_OUTPUT]
    checks["gadget a6 <= 6, b6 <= 9"] = all(a.num[5] <= 6 and a.den[5] <= 9 for a in six)
    for d2 in (Fraction(1, 7), Fraction(1, 8)):
        try:
            check_inv_gadget(d2, d2 / INV_RATIO)
            checks[f"gadget threshold at δ₂={d2}"] = True
        except PassError:
            checks[f"gadget threshold at δ₂={d2}"] = False
    bad = [k for k, v in checks.items() if not v]
    report(6, not bad, f"{len(checks) - len(bad)}/{len(checks)} checks" + (f"; failing: {bad}" if bad else ""))


def test_criterion_7_gadget_identities():
    u, v = Polynomial.var(0), Polynomial.var(1)
    times_ok = square_times_identity() == RatFunc(u * v + u + v + 1)
    square_ok = inv_square_identity() == RatFunc(u * u + 2 * u + 1)
    consistent = (check_program_consistency(SQUARE_TIMES_GADGET, square_times_solution()) == []
                  and check_program_consistency(INV_SQUARE_GADGET, inv_square_solution()) == [])
    report(7, times_ok and square_ok and consistent,
           f"product gadget {'=' if times_ok else '!='} xy+x+y+1, "
           f"square gadget {'=' if square_ok else '!='} x^2+2x+1, every gadget constraint holds symbolically")


def test_criterion_8_range_certification():
    runs = [(TORUS, True), ("x*y - 1 = 0", False), ("x^2 + y^2 - 2 = 0 /\\ x >= 0", False)]
    runs += [(print_etr(p.instance.formula, p.instance.names), False)
             for p in (generate_planted(s, 5, "etr") for s in range(3))]
    settings = [("shift", Fraction(1, 8)), ("square", Fraction(1, 8)), ("inv", Fraction(1, 8)), ("inv", Fraction(1, 7))]
    total = failed = 0
    detail = []
    for text, compact in runs:
        for target, d in settings:
            res = pipeline(text, target, d, TowerMode.test(2), assume_compact=compact)
            cert = certify_instance(res.instance)
            total += len(cert.variables)
            if not cert.ok:
                failed += len(cert.failures) + len(cert.operand_failures)
                detail.append(f"{target}@{d}")
    report(8, failed == 0, f"{total} variables certified over {len(runs) * len(settings)} runs, {failed} failures"
                           + (f" in {detail}" if detail else ""))


def test_criterion_9_towers():
    from etrinv.formula import Instance, PolyEq, EqOne, Var

    checks = {}
    one_var = Instance(Fragment.CONJ, (Var("x"),), (PolyEq(Polynomial.var(0) - 1),))
    out, w, _ = compactify(one_var, TowerMode.test(3))
    image = w.apply([1])
    top = next(i for i, v in enumerate(out.vars) if v.label == "<2^(2^3)>")
    checks["<2^(2^3)> = 256"] = image[top] == 256 and evaluate(out, image)
    delta = Fraction(1, 4)
    ami = Instance(Fragment.AMI, (Var("x"),), (EqOne(0),))
    out, w, _ = to_small(ami, delta, TowerMode.test(2))
    image = w.apply([1])
    eps = next(i for i, v in enumerate(out.vars) if v.label == "<eps>")
    checks["height-2 eps = δ/16"] = image[eps] == delta / 16 and evaluate(out, image)

    out, _, rep = compactify(one_var, TowerMode.paper())
    k = paper_tower_height(1, formula_length(one_var))
    chain = [c for c in out.constraints[len(one_var.constraints):]
             if all(out.vars[x].name.startswith("t") for x in c.variables())]
    checks["compact chain has k+1 constraints"] = len(chain) == k + 1 == rep.extra["tower_constraints"]
    out, _, rep = to_small(ami, delta, TowerMode.paper())
    L = formula_length(ami)
    steps = [v for v in out.vars if v.label and v.label.startswith("<delta*2^-")]
    checks["small chain has L+6 steps"] = len(steps) == L + 6 == rep.extra["tower_steps"]
    # ceil(8 n log2 L) by hand: 8*1*1, 8*1*2, ceil(16*1.58496...) = 26
    for (n, length), want in {(1, 2): 8, (1, 4): 16, (2, 3): 26}.items():
        checks[f"k({n},{length}) = {want}"] = paper_tower_height(n, length) == want
    bad = [name for name, v in checks.items() if not v]
    report(9, not bad, f"{len(checks) - len(bad)}/{len(checks)} checks" + (f"; failing: {bad}" if bad else ""))


def test_criterion_10_torus_end_to_end():
    started = time.perf_counter()
    res = pipeline(TORUS, "inv", Fraction(1, 8), TowerMode.test(3), assume_compact=True)
    image = res.witness.apply([6, 0, 0])
    bad = failing_constraints(res.instance, image)
    back = res.witness.invert(image)
    elapsed = time.perf_counter() - started
    ok = not bad and back == [6, 0, 0] and res.instance.fragment is Fragment.INV and elapsed < 10
    report(10, ok, f"{res.instance.n} variables, {len(res.instance.constraints)} constraints, "
                   f"{len(bad)} violated, backward ({', '.join(map(str, back))}), {elapsed:.2f}s")
