"""Sparse multivariate polynomials and rational functions over exact rationals.

Variables are integer indices. A monomial is a tuple of ``(index, exponent)``
pairs sorted by index with every exponent >= 1; the empty tuple is the
constant monomial. Polynomials are immutable and kept in canonical form (no
zero coefficients), so structural equality is mathematical equality.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple

Monomial = Tuple[Tuple[int, int], ...]

ONE_MONO: Monomial = ()


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    merged: Dict[int, int] = dict(m1)
    for v, e in m2:
        merged[v] = merged.get(v, 0) + e
    return tuple(sorted(merged.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


class Polynomial:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | Iterable[Tuple[Monomial, Fraction]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: Dict[Monomial, Fraction] = {}
        for mono, coef in items:
            coef = Fraction(coef)
            if coef:
                mono = tuple(sorted((int(v), int(e)) for v, e in mono if e))
                clean[mono] = clean.get(mono, Fraction(0)) + coef
        self._terms = {m: c for m, c in sorted(clean.items()) if c}
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction]) -> "Polynomial":
        # trusted constructor: keys already canonical, values nonzero
        p = cls.__new__(cls)
        p._terms = dict(sorted(terms.items()))
        p._hash = None
        return p

    @classmethod
    def const(cls, c) -> "Polynomial":
        c = Fraction(c)
        return cls._raw({ONE_MONO: c} if c else {})

    @classmethod
    def var(cls, index: int, coef=1) -> "Polynomial":
        return cls._raw({((index, 1),): Fraction(coef)})

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get(ONE_MONO, Fraction(0))

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(mono, Fraction(0))

    def degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=0)

    def variables(self) -> set:
        return {v for m in self._terms for v, _ in m}

    def as_single_variable(self) -> int | None:
        """Index v if the polynomial is exactly the variable x_v."""
        if len(self._terms) == 1:
            (mono, coef), = self._terms.items()
            if coef == 1 and len(mono) == 1 and mono[0][1] == 1:
                return mono[0][0]
        return None

    # -- arithmetic ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __add__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if not other:
                return Polynomial()
            return Polynomial._raw({m: c * other for m, c in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial._raw({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Polynomial":
        if e < 0:
            raise ValueError("negative exponent")
        result = Polynomial.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # -- evaluation and substitution ---------------------------------------

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for mono, coef in self._terms.items():
            term = coef
            for v, e in mono:
                term *= point[v] ** e
            total += term
        return total

    def substitute(self, subs: Mapping[int, "Polynomial"]) -> "Polynomial":
        """Replace x_v by subs[v]; variables missing from subs stay as they are."""
        cache: Dict[Tuple[int, int], Polynomial] = {}
        acc: Dict[Monomial, Fraction] = {}
        for mono, coef in self._terms.items():
            term = Polynomial.const(coef)
            for v, e in mono:
                if v not in subs:
                    term = term * Polynomial._raw({((v, e),): Fraction(1)})
                    continue
                key = (v, e)
                if key not in cache:
                    cache[key] = subs[v] ** e
                term = term * cache[key]
            _accumulate(acc, term)
        return Polynomial._raw({m: c for m, c in acc.items() if c})

    def substitute_rational(self, subs: Mapping[int, "RatFunc"]) -> "RatFunc":
        """Replace x_v by the rational function subs[v] over a shared denominator;
        variables missing from subs stay as they are."""
        missing = self.variables() - set(subs)
        if missing:
            subs = dict(subs)
            for v in missing:
                subs[v] = RatFunc(Polynomial.var(v))
        if all(subs[v].den.is_constant() for v in self.variables()):
            return RatFunc(self.substitute({v: subs[v].num for v in self.variables()}))
        max_exp: Dict[int, int] = {}
        for mono in self._terms:
            for v, e in mono:
                if not subs[v].den.is_constant():
                    max_exp[v] = max(max_exp.get(v, 0), e)
        num_cache: Dict[Tuple[int, int], Polynomial] = {}
        den_cache: Dict[Tuple[int, int], Polynomial] = {}

        def npow(v, e):
            if (v, e) not in num_cache:
                num_cache[(v, e)] = subs[v].num ** e
            return num_cache[(v, e)]

        def dpow(v, e):
            if (v, e) not in den_cache:
                den_cache[(v, e)] = subs[v].den ** e
            return den_cache[(v, e)]

        acc: Dict[Monomial, Fraction] = {}
        for mono, coef in self._terms.items():
            term = Polynomial.const(coef)
            exps = dict(mono)
            for v, e in mono:
                term = term * npow(v, e)
            for v, me in max_exp.items():
                rest = me - exps.get(v, 0)
                if rest:
                    term = term * dpow(v, rest)
            _accumulate(acc, term)
        num = Polynomial._raw({m: c for m, c in acc.items() if c})
        den = Polynomial.const(1)
        for v, me in max_exp.items():
            den = den * dpow(v, me)
        return RatFunc(num, den)

    def reindex(self, mapping: Mapping[int, int]) -> "Polynomial":
        return Polynomial(
            {tuple((mapping[v], e) for v, e in m): c for m, c in self._terms.items()}
        )

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()})"

    def to_text(self, names: Sequence[str] | None = None) -> str:
        """Render with ``*``, ``^`` and integer or ``p/q`` coefficients."""
        if not self._terms:
            return "0"
        parts = []
        for i, (mono, coef) in enumerate(self._terms.items()):
            sign = "-" if coef < 0 else "+"
            mag = abs(coef)
            factors = []
            for v, e in mono:
                name = names[v] if names is not None else f"x{v}"
                factors.append(name if e == 1 else f"{name}^{e}")
            if mag != 1 or not factors:
                lit = str(mag.numerator) if mag.denominator == 1 else f"({mag.numerator}/{mag.denominator})"
                factors.insert(0, lit)
            body = "*".join(factors)
            if i == 0:
                parts.append(body if sign == "+" else f"-{body}")
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)


def _accumulate(acc: Dict[Monomial, Fraction], p: Polynomial) -> None:
    for m, c in p._terms.items():
        acc[m] = acc.get(m, 0) + c


def _coerce(value) -> Polynomial | None:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, Fraction)):
        return Polynomial.const(value)
    return None


class RatFunc:
    """Quotient num/den of polynomials; a constant denominator is folded into num."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial | int | Fraction, den: Polynomial | int | Fraction = 1):
        num = _coerce(num)
        den = _coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if den.is_constant():
            num = num * (1 / den.constant_term())
            den = Polynomial.const(1)
        elif num.is_zero():
            den = Polynomial.const(1)
        self.num = num
        self.den = den

    @classmethod
    def var(cls, index: int) -> "RatFunc":
        return cls(Polynomial.var(index))

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        d = self.den.evaluate(point)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes")
        return self.num.evaluate(point) / d

    def equals(self, other: "RatFunc | Polynomial | int | Fraction") -> bool:
        other = _rcoerce(other)
        return self.num * other.den == other.num * self.den

    def __eq__(self, other) -> bool:
        other = _rcoerce(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __add__(self, other) -> "RatFunc":
        other = _rcoerce(other)
        if other is None:
            return NotImplemented
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        if other.den.is_constant():
            return RatFunc(self.num + other.num * self.den, self.den)
        if self.den.is_constant():
            return RatFunc(self.num * other.den + other.num, other.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other) -> "RatFunc":
        other = _rcoerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "RatFunc":
        return (-self) + other

    def __mul__(self, other) -> "RatFunc":
        other = _rcoerce(other)
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFunc":
        other = _rcoerce(other)
        if other is None:
            return NotImplemented
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "RatFunc":
        return _rcoerce(other) / self

    def substitute(self, subs: Mapping[int, "RatFunc"]) -> "RatFunc":
        n = self.num.substitute_rational(subs)
        if self.den.is_constant():
            return n
        d = self.den.substitute_rational(subs)
        return n / d

    def __repr__(self) -> str:
        if self.den.is_constant():
            return f"RatFunc({self.num.to_text()})"
        return f"RatFunc(({self.num.to_text()}) / ({self.den.to_text()}))"


def _rcoerce(value) -> RatFunc | None:
    if isinstance(value, RatFunc):
        return value
    if isinstance(value, (Polynomial, int, Fraction)):
        return RatFunc(value)
    return None
