"""Text form of loop transfer functions.

Accepted input (whitespace ignored)::

    tf        := ["-"] product [ "/" product ]
    product   := factor { "*" factor }
    factor    := atom [ "^" uint ]
    atom      := number | var | "(" expr ")"
    expr      := ["+"|"-"] product { ("+"|"-") product }
    var       := "s" | "z"

The variable fixes the domain: ``s`` continuous, ``z`` discrete. A
denominator product extends to the end of the input, so ``1/s*(s+1)`` is
``1 / (s (s+1))``. Parenthesized groups may nest products and sums.

Top-level factors are rooted one at a time, so a linear factor like
``(s-10)`` yields the zero ``10`` exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import MixedVariables, OriginZero, ParseError
from .polynomial import Poly, poly_add, poly_mul, poly_roots
from .transfer_function import ORIGIN_TOL, Domain, LoopTF

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "var", "op", "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUMBER.match(text, i)
        if m:
            toks.append(_Tok("num", m.group(0), i))
            i = m.end()
        elif ch in "sz":
            toks.append(_Tok("var", ch, i))
            i += 1
        elif ch in "+-*/^()":
            toks.append(_Tok("op", ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", i, text)
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Product:
    """A constant times a list of (unexpanded) polynomial factors."""

    __slots__ = ("const", "factors")

    def __init__(self, const=1.0, factors=()):
        self.const = float(const)
        self.factors = list(factors)

    def times(self, other: _Product) -> _Product:
        return _Product(self.const * other.const, self.factors + other.factors)

    def power(self, k: int) -> _Product:
        return _Product(self.const ** k, self.factors * k)

    def expand(self) -> Poly:
        p = Poly([self.const])
        for f in self.factors:
            p = poly_mul(p, f)
        return p


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.var: str | None = None
        self.var_pos: int | None = None

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.pos, self.text)

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str):
        if not self.accept(op):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {op!r}, found {found!r}")

    def parse(self):
        negate = self.accept("-")
        num = self.product()
        den = _Product()
        if self.accept("/"):
            den = self.product()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        if negate:
            num.const = -num.const
        if self.var is None:
            raise ParseError("no variable: expected 's' or 'z'", 0, self.text)
        return num, den

    def product(self) -> _Product:
        out = self.factor()
        while self.accept("*"):
            out = out.times(self.factor())
        return out

    def factor(self) -> _Product:
        base = self.atom()
        if self.accept("^"):
            tok = self.tok
            if tok.kind != "num" or not tok.text.isdigit():
                raise self.error("exponent must be a non-negative integer")
            self.i += 1
            base = base.power(int(tok.text))
        return base

    def atom(self) -> _Product:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return _Product(float(tok.text))
        if tok.kind == "var":
            self.i += 1
            if self.var is None:
                self.var, self.var_pos = tok.text, tok.pos
            elif tok.text != self.var:
                raise MixedVariables(
                    f"variable {tok.text!r} mixed with {self.var!r} "
                    f"(first used at position {self.var_pos})",
                    tok.pos, self.text)
            return _Product(1.0, [Poly([0.0, 1.0])])
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        found = tok.text or "end of input"
        raise self.error(f"expected a number, variable or '(', found {found!r}")

    def expr(self) -> _Product:
        sign = -1.0 if self.accept("-") else 1.0
        if sign > 0:
            self.accept("+")
        first = self.product()
        first.const *= sign
        terms = [first]
        while self.tok.kind == "op" and self.tok.text in "+-":
            s = -1.0 if self.tok.text == "-" else 1.0
            self.i += 1
            t = self.product()
            t.const *= s
            terms.append(t)
        if len(terms) == 1:
            return terms[0]
        total = Poly([0.0])
        for t in terms:
            total = poly_add(total, t.expand())
        return _Product(1.0, [total])


def _factor_roots(prod: _Product, text: str, role: str):
    """Leading coefficient and roots of a factored product."""
    lead = prod.const
    roots: list[complex] = []
    for f in prod.factors:
        if f.is_zero():
            raise ParseError(f"{role} factor is identically zero", None, text)
        lead *= f.leading
        if f.degree >= 1:
            roots.extend(poly_roots(f).roots)
    return lead, roots


def parse_tf(text: str) -> LoopTF:
    """Parse transfer-function text into a LoopTF.

    >>> L = parse_tf("2*(z+2)/(z+0.5)")
    >>> L.gain, L.zeros, L.poles
    (2.0, ((-2+0j),), ((-0.5+0j),))
    """
    p = _Parser(text)
    num, den = p.parse()
    domain = Domain.CONTINUOUS if p.var == "s" else Domain.DISCRETE
    k_num, zeros = _factor_roots(num, text, "numerator")
    k_den, poles = _factor_roots(den, text, "denominator")
    if k_den == 0:
        raise ParseError("denominator is identically zero", None, text)
    gain = k_num / k_den
    if gain == 0:
        # a zero numerator carries no zero locations
        zeros = []
    if any(abs(z) < ORIGIN_TOL for z in zeros):
        raise OriginZero(f"zero at {p.var} = 0 is not allowed")
    integrators = 0
    if domain is Domain.CONTINUOUS:
        finite = [q for q in poles if abs(q) >= ORIGIN_TOL]
        integrators = len(poles) - len(finite)
        poles = finite
    return LoopTF(domain, gain, tuple(zeros), tuple(poles), integrators)


def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _linear(var: str, r: float) -> str:
    if r == 0:
        return var
    if r > 0:
        return f"({var}-{_fmt_num(r)})"
    return f"({var}+{_fmt_num(-r)})"


def _quadratic(var: str, r: complex) -> str:
    b = -2.0 * r.real
    c = r.real * r.real + r.imag * r.imag
    mid = ""
    if b > 0:
        mid = f"+{_fmt_num(b)}*{var}"
    elif b < 0:
        mid = f"-{_fmt_num(-b)}*{var}"
    return f"({var}^2{mid}+{_fmt_num(c)})"


def _factor_strings(var: str, roots) -> list[str]:
    single = []
    for r in roots:
        if r.imag == 0:
            single.append(_linear(var, r.real))
        elif r.imag > 0:
            single.append(_quadratic(var, r))
    out: list[str] = []
    counts: dict[str, int] = {}
    for f in single:
        if f not in counts:
            out.append(f)
        counts[f] = counts.get(f, 0) + 1
    return [f if counts[f] == 1 else f"{f}^{counts[f]}" for f in out]


def format_tf(L: LoopTF) -> str:
    """Canonical text form that ``parse_tf`` maps back to ``L``.

    >>> format_tf(parse_tf("1/s"))
    '1/s'
    """
    var = L.variable
    num = [_fmt_num(L.gain)] + _factor_strings(var, L.zeros)
    den = []
    if L.integrators == 1:
        den.append(var)
    elif L.integrators > 1:
        den.append(f"{var}^{L.integrators}")
    den += _factor_strings(var, L.poles)
    text = "*".join(num)
    if den:
        text += "/" + ("*".join(den) if len(den) == 1 else "(" + "*".join(den) + ")")
    elif L.m == 0:
        # constant loop with no variable would not parse back
        text += f"*{var}^0"
    return text
