"""Text grammar for quantifier-free ETR formulas and JSON for fragment instances.

Formula grammar (precedence: not > * > + - > comparison > /\\ > \\/)::

    formula  := disjunct { "\\/" disjunct }
    disjunct := conjunct { "/\\" conjunct }
    conjunct := "not" conjunct | "(" formula ")" | atom
    atom     := expr cmp expr            cmp in  =  <  <=  >  >=
    expr     := ["+" | "-"] term { ("+" | "-") term }
    term     := factor { "*" factor }
    factor   := "-" factor | base [ "^" nat ]
    base     := nat [ "/" nat ] | identifier | "(" expr ")"

Every comparison is moved to the form ``p cmp 0`` with cmp in {=, >=, >}.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from .formula import (
    CONSTRAINT_TYPES,
    Atom,
    AtomKind,
    Conj,
    Disj,
    FormulaNode,
    Fragment,
    Instance,
    Interval,
    Neg,
    PolyEq,
    Var,
    VarAnnotation,
    VarTable,
    validate_fragment,
)
from .polynomial import Polynomial
from .rational import RationalFormatError, format_rational, parse_rational


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.message = message
        self.pos = pos


class InstanceFormatError(ValueError):
    pass


class InstanceWarning(UserWarning):
    pass


# -- tokens ---------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>\\/|/\\|<=|>=|[-+*^()=<>/])
    """,
    re.VERBOSE,
)

_QUANTIFIERS = {"forall", "exists", "∀", "∃"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    out: List[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            ch = text[pos]
            if ch in "∀∃":
                raise ParseError("quantifiers are not supported (all variables are existential)", pos, text)
            raise ParseError(f"unexpected character {ch!r}", pos, text)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            word = m.group()
            if kind == "ident" and word == "not":
                kind = "op"
            elif kind == "ident" and word in _QUANTIFIERS:
                raise ParseError("quantifiers are not supported (all variables are existential)", pos, text)
            out.append(Token(kind, word, pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


class _Backtrack(Exception):
    pass


class _Parser:
    def __init__(self, text: str, table: VarTable, fixed_vars: bool = False):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.table = table
        self.fixed = fixed_vars

    # helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in texts

    def take(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.take()

    def fail(self, message: str, pos: int | None = None):
        raise ParseError(message, self.tok.pos if pos is None else pos, self.text)

    # formulas
    def formula(self) -> FormulaNode:
        kids = [self.disjunct()]
        while self.at("\\/"):
            self.take()
            kids.append(self.disjunct())
        return kids[0] if len(kids) == 1 else Disj(tuple(kids))

    def disjunct(self) -> FormulaNode:
        kids = [self.conjunct()]
        while self.at("/\\"):
            self.take()
            kids.append(self.conjunct())
        return kids[0] if len(kids) == 1 else Conj(tuple(kids))

    def conjunct(self) -> FormulaNode:
        if self.at("not"):
            self.take()
            return Neg(self.conjunct())
        if self.at("("):
            mark = self.i
            table_len = len(self.table)
            try:
                return self.atom()
            except ParseError:
                self.i = mark
                self._truncate(table_len)
            self.take()
            inner = self.formula()
            self.expect(")")
            return inner
        return self.atom()

    def _truncate(self, n: int):
        # drop variables introduced by an abandoned atom attempt
        if len(self.table) > n:
            self.table = VarTable(self.table.names[:n])

    def atom(self) -> Atom:
        lhs = self.expr()
        if not self.at("=", "<", "<=", ">", ">="):
            self.fail(f"expected a comparison, found {self.tok.text or 'end of input'!r}")
        cmp = self.take().text
        rhs = self.expr()
        if cmp == "=":
            return Atom(AtomKind.EQ, lhs - rhs)
        if cmp == ">":
            return Atom(AtomKind.GT, lhs - rhs)
        if cmp == ">=":
            return Atom(AtomKind.GEQ, lhs - rhs)
        if cmp == "<":
            return Atom(AtomKind.GT, rhs - lhs)
        return Atom(AtomKind.GEQ, rhs - lhs)

    # polynomials
    def expr(self) -> Polynomial:
        neg = False
        if self.at("+", "-"):
            neg = self.take().text == "-"
        acc = self.term()
        if neg:
            acc = -acc
        while self.at("+", "-"):
            op = self.take().text
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Polynomial:
        acc = self.factor()
        while self.at("*"):
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> Polynomial:
        if self.at("-"):
            self.take()
            return -self.factor()
        base = self.base()
        if self.at("^"):
            self.take()
            if self.at("-"):
                self.fail("negative exponent in power")
            if self.tok.kind != "num":
                self.fail("expected a nonnegative integer exponent")
            base = base ** int(self.take().text)
        return base

    def base(self) -> Polynomial:
        t = self.tok
        if t.kind == "num":
            self.take()
            value = Fraction(int(t.text))
            if self.at("/") and self.toks[self.i + 1].kind == "num":
                self.take()
                den = int(self.take().text)
                if den == 0:
                    self.fail("zero denominator", t.pos)
                value /= den
            return Polynomial.const(value)
        if t.kind == "ident":
            self.take()
            if t.text not in self.table:
                if self.fixed:
                    self.fail(f"unknown variable {t.text!r}", t.pos)
                self.table.add(t.text)
            return Polynomial.var(self.table.index(t.text))
        if self.at("("):
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail(f"unexpected {t.text or 'end of input'!r}")


def parse_etr(text: str, vars: VarTable | Sequence[str] | None = None) -> Tuple[FormulaNode, VarTable]:
    """Parse formula text; an empty text is the empty conjunction.

    A pre-seeded ``vars`` table fixes the index of known names (new names are
    appended), which makes print/parse round trips index-exact.
    """
    table = VarTable(vars if vars is not None else ())
    if isinstance(vars, VarTable):
        table = VarTable(vars.names)
    p = _Parser(text, table)
    if p.tok.kind == "eof":
        return Conj(()), p.table
    node = p.formula()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r} after formula")
    return node, p.table


def parse_polynomial(text: str, names: Sequence[str]) -> Polynomial:
    p = _Parser(text, VarTable(names), fixed_vars=True)
    poly = p.expr()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r} after expression")
    return poly


# -- printing -------------------------------------------------------------------

_CMP_TEXT = {AtomKind.EQ: "=", AtomKind.GEQ: ">=", AtomKind.GT: ">"}


def print_etr(node: FormulaNode, names: Sequence[str] | VarTable) -> str:
    names = list(names)

    def wrap(child) -> str:
        s = go(child)
        return f"({s})" if isinstance(child, (Conj, Disj)) else s

    def go(n) -> str:
        if isinstance(n, Atom):
            return f"{n.poly.to_text(names)} {_CMP_TEXT[n.kind]} 0"
        if isinstance(n, Neg):
            return f"not {wrap(n.child)}"
        sep = " /\\ " if isinstance(n, Conj) else " \\/ "
        return sep.join(wrap(c) for c in n.children)

    return go(node)


def formula_to_json(node: FormulaNode, names: Sequence[str]) -> dict:
    names = list(names)
    if isinstance(node, Atom):
        return {"op": "atom", "cmp": _CMP_TEXT[node.kind], "poly": node.poly.to_text(names)}
    if isinstance(node, Neg):
        return {"op": "not", "arg": formula_to_json(node.child, names)}
    op = "and" if isinstance(node, Conj) else "or"
    return {"op": op, "args": [formula_to_json(c, names) for c in node.children]}


# -- instance JSON ----------------------------------------------------------------


def _poly_terms(p: Polynomial, names: Sequence[str]) -> list:
    return [[format_rational(c), [[names[v], e] for v, e in m]] for m, c in p.items()]


def _poly_from_terms(terms, table: VarTable) -> Polynomial:
    out = {}
    for entry in terms:
        coef, mono = entry
        key = tuple(sorted((table.index(name), int(e)) for name, e in mono))
        if key in out:
            raise InstanceFormatError("repeated monomial in polynomial terms")
        c = parse_rational(coef)
        if c == 0:
            raise InstanceFormatError("zero coefficient in polynomial terms")
        out[key] = c
    return Polynomial(out)


def _rat(s) -> Fraction:
    if not isinstance(s, str):
        raise RationalFormatError(f"malformed rational string {s!r}")
    return parse_rational(s)


def instance_to_dict(inst: Instance) -> dict:
    names = inst.names
    out: dict = {
        "fragment": inst.fragment.value,
        "delta": None if inst.delta is None else format_rational(inst.delta),
    }
    if inst.source_delta is not None:
        out["source_delta"] = format_rational(inst.source_delta)
    vs = []
    for v in inst.vars:
        entry: dict = {
            "name": v.name,
            "interval": None if v.interval is None else [format_rational(v.interval.lo), format_rational(v.interval.hi)],
            "annotation": None,
        }
        a = v.annotation
        if a is not None:
            entry["annotation"] = {
                "sources": [names[s] for s in a.sources],
                "num": [format_rational(c) for c in a.num],
                "den": [format_rational(c) for c in a.den],
                "nonneg": a.nonneg,
            }
        if v.label is not None:
            entry["label"] = v.label
        vs.append(entry)
    out["vars"] = vs
    cs = []
    for c in inst.constraints:
        if isinstance(c, PolyEq):
            cs.append({"kind": c.kind, "args": _poly_terms(c.poly, names)})
        else:
            cs.append({"kind": c.kind, "args": [names[i] for i in c.variables()]})
    out["constraints"] = cs
    if inst.formula is not None:
        out["formula"] = print_etr(inst.formula, names)
    if inst.inherited:
        out["inherited"] = [names[i] for i in inst.inherited]
    return out


def print_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1, ensure_ascii=False)


def instance_from_dict(obj: dict, warn: bool = True) -> Instance:
    if not isinstance(obj, dict):
        raise InstanceFormatError("instance JSON must be an object")
    try:
        fragment = Fragment(obj["fragment"])
    except (KeyError, ValueError):
        raise InstanceFormatError(f"unknown fragment tag {obj.get('fragment')!r}") from None
    try:
        raw_vars = obj.get("vars", [])
        table = VarTable(v["name"] for v in raw_vars)
        delta = None if obj.get("delta") is None else _rat(obj["delta"])
        source_delta = None if obj.get("source_delta") is None else _rat(obj["source_delta"])
        vars_out = []
        for v in raw_vars:
            iv = None
            if v.get("interval") is not None:
                lo, hi = v["interval"]
                iv = Interval(_rat(lo), _rat(hi))
            ann = None
            a = v.get("annotation")
            if a is not None:
                ann = VarAnnotation(
                    tuple(table.index(s) for s in a["sources"]),
                    tuple(_rat(x) for x in a["num"]),
                    tuple(_rat(x) for x in a["den"]),
                    bool(a.get("nonneg", False)),
                )
            vars_out.append(Var(v["name"], iv, ann, v.get("label")))
        cons = []
        for c in obj.get("constraints", []):
            kind = c["kind"]
            if kind not in CONSTRAINT_TYPES:
                raise InstanceFormatError(f"unknown constraint kind {kind!r}")
            if kind == "poly":
                cons.append(PolyEq(_poly_from_terms(c["args"], table)))
            else:
                cons.append(CONSTRAINT_TYPES[kind](*(table.index(a) for a in c["args"])))
        formula = None
        if obj.get("formula") is not None:
            formula, t2 = parse_etr(obj["formula"], table)
            if len(t2) != len(table):
                raise InstanceFormatError("formula mentions undeclared variables")
        inherited = tuple(table.index(n) for n in obj.get("inherited", []))
    except RationalFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"malformed instance: {exc}") from exc
    inst = Instance(fragment, tuple(vars_out), tuple(cons), formula, delta, source_delta, inherited)
    if warn:
        for violation in validate_fragment(inst):
            warnings.warn(InstanceWarning(str(violation)), stacklevel=2)
    return inst


def parse_instance(text: str, warn: bool = True) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(obj, warn)
