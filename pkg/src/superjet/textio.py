"""Text grammar and JSON form for differential polynomials.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INT)?
    atom   := INT | IDENT | "(" expr ")"

Identifiers ``u1_3`` (even jet), ``s1_0_2`` (odd jet: field, level, jet),
``th1_2`` (odd jet at level 0), ``f1_0``, ``t1_0``, ``tau2`` (tau-cover
symbols) are generators; any other identifier must be a declared parameter.
Division is only allowed by nonzero rational constants.
"""

from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq
from sympy import QQ

from .diffpoly import DiffPoly, JetContext, even, fvar, gen_name, odd, sorted_keys, tauvar, tvar
from .errors import ParseSyntaxError, UnknownGenerator

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")
_GEN_PATTERNS = [
    (re.compile(r"u(\d+)_(\d+)"), lambda a, s: even(a, s)),
    (re.compile(r"s(\d+)_(\d+)_(\d+)"), lambda a, m, s: odd(a, m, s)),
    (re.compile(r"th(\d+)_(\d+)"), lambda a, s: odd(a, 0, s)),
    (re.compile(r"f(\d+)_(\d+)"), lambda a, p: fvar(a, p)),
    (re.compile(r"t(\d+)_(\d+)"), lambda a, p: tvar(a, p)),
    (re.compile(r"tau(\d+)"), lambda p: tauvar(p)),
]
_GEN_PREFIX = re.compile(r"(u|s|th|f|t|tau)\d")


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text: str, ctx: JetContext):
        self.text = text
        self.ctx = ctx
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        stripped_end = len(text.rstrip())
        while pos < stripped_end:
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise ParseSyntaxError(f"unexpected character {text[bad]!r}", *_position(text, bad))
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.i = 0

    def error(self, msg: str, offset: int | None = None):
        if offset is None:
            offset = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text.rstrip())
        raise ParseSyntaxError(msg, *_position(self.text, offset))

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        t = self.peek()
        if t is None:
            self.error("unexpected end of input")
        self.i += 1
        return t

    def parse(self) -> DiffPoly:
        if not self.tokens:
            self.error("empty expression")
        p = self.expr()
        if self.peek() is not None:
            self.error(f"unexpected token {self.peek()[1]!r}")
        return p

    def expr(self) -> DiffPoly:
        p = self.term()
        while (t := self.peek()) is not None and t[1] in "+-" and t[0] == "op":
            self.take()
            q = self.term()
            p = p + q if t[1] == "+" else p - q
        return p

    def term(self) -> DiffPoly:
        p = self.unary()
        while (t := self.peek()) is not None and t[0] == "op" and t[1] in "*/":
            self.take()
            q = self.unary()
            if t[1] == "*":
                p = p * q
            else:
                c = _as_constant(q)
                if c is None or not c:
                    self.error("division is only allowed by a nonzero rational constant", t[2])
                p = p.scale(1 / c)
        return p

    def unary(self) -> DiffPoly:
        t = self.peek()
        if t is not None and t[0] == "op" and t[1] in "+-":
            self.take()
            p = self.unary()
            return -p if t[1] == "-" else p
        return self.power()

    def power(self) -> DiffPoly:
        p = self.atom()
        t = self.peek()
        if t is not None and t[0] == "op" and t[1] == "^":
            self.take()
            k = self._exponent()
            if k < 0:
                return self._negative_power(p, k)
            return p ** k
        return p

    def _exponent(self) -> int:
        n = self.take()
        paren = n[1] == "("
        if paren:
            n = self.take()
        sign = 1
        if n[0] == "op" and n[1] == "-":
            sign = -1
            n = self.take()
        if n[0] != "num":
            self.error("exponent must be an integer", n[2])
        if paren:
            close = self.take()
            if close[1] != ")":
                self.error("expected ')'", close[2])
        return sign * int(n[1])

    def _negative_power(self, p: DiffPoly, k: int) -> DiffPoly:
        if len(p.terms) == 1:
            (key, c), = p.terms.items()
            if not key[1] and not key[2] and any(key[0]) and c == self.ctx.one:
                return DiffPoly(self.ctx, {(tuple(e * k for e in key[0]), (), ()): c})
        self.error("negative exponents are only allowed on graded parameters")

    def atom(self) -> DiffPoly:
        t = self.take()
        kind, val, off = t
        if kind == "num":
            return self.ctx.const(int(val))
        if kind == "id":
            return self._identifier(val, off)
        if val == "(":
            p = self.expr()
            close = self.peek()
            if close is None or close[1] != ")":
                self.error("expected ')'")
            self.take()
            return p
        self.error(f"unexpected token {val!r}", off)

    def _identifier(self, name: str, off: int) -> DiffPoly:
        for pat, build in _GEN_PATTERNS:
            m = pat.fullmatch(name)
            if m:
                g = build(*(int(x) for x in m.groups()))
                try:
                    return self.ctx.gen(g)
                except UnknownGenerator as exc:
                    line, col = _position(self.text, off)
                    raise UnknownGenerator(f"{name}: {exc} (line {line}, column {col})") from None
        if _GEN_PREFIX.match(name):
            self.error(f"malformed generator {name!r}", off)
        try:
            return self.ctx.param(name)
        except UnknownGenerator:
            line, col = _position(self.text, off)
            raise UnknownGenerator(f"unknown identifier {name!r} (line {line}, column {col})") from None


def _as_constant(p: DiffPoly):
    if not p.terms:
        return p.ctx.coerce(0)
    if len(p.terms) == 1:
        (k, c), = p.terms.items()
        if k == (p.ctx.no_grade, (), ()):
            if p.ctx.K is QQ or c.is_ground:
                return mpq(c) if p.ctx.K is QQ else mpq(c.LC)
    return None


def parse_poly(text: str, ctx: JetContext) -> DiffPoly:
    return _Parser(text, ctx).parse()


# printing ---------------------------------------------------------------------

def _rational_str(x) -> str:
    x = mpq(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def format_coeff(ctx: JetContext, c) -> str:
    if ctx.K is QQ:
        return _rational_str(c)
    pieces = []
    for exps, r in sorted(c.terms(), reverse=True):
        facs = [n if e == 1 else f"{n}^{e}" for n, e in zip(ctx.plain_params, exps) if e]
        r = mpq(r)
        if not facs:
            pieces.append(_rational_str(r))
        elif r == 1:
            pieces.append("*".join(facs))
        elif r == -1:
            pieces.append("-" + "*".join(facs))
        else:
            pieces.append(_rational_str(r) + "*" + "*".join(facs))
    out = pieces[0]
    for p in pieces[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def _coeff_is_single(ctx: JetContext, c) -> bool:
    return ctx.K is QQ or len(c.terms()) == 1


def format_key(ctx: JetContext, key) -> str:
    grades, ev, od = key
    facs = []
    for (name, _), e in zip(ctx.graded_params, grades):
        if e:
            facs.append(name if e == 1 else f"{name}^{e}" if e > 0 else f"{name}^({e})")
    for g, e in ev:
        facs.append(gen_name(g) if e == 1 else f"{gen_name(g)}^{e}")
    facs.extend(gen_name(o) for o in od)
    return "*".join(facs)


def format_poly(p: DiffPoly) -> str:
    if not p.terms:
        return "0"
    ctx = p.ctx
    out = ""
    for i, key in enumerate(sorted_keys(p.terms)):
        c = p.terms[key]
        mono = format_key(ctx, key)
        cs = format_coeff(ctx, c)
        single = _coeff_is_single(ctx, c)
        if not mono:
            s = cs if single else f"({cs})"
        elif cs == "1":
            s = mono
        elif cs == "-1":
            s = "-" + mono
        elif single:
            s = f"{cs}*{mono}"
        else:
            s = f"({cs})*{mono}"
        if i == 0:
            out = s
        elif s.startswith("-"):
            out += " - " + s[1:]
        else:
            out += " + " + s
    return out


# JSON -------------------------------------------------------------------------

def coeff_to_json(ctx: JetContext, c) -> list:
    if ctx.K is QQ:
        items = [((), c)]
    else:
        items = sorted(c.terms(), reverse=True)
    out = []
    for exps, r in items:
        r = mpq(r)
        out.append({
            "params": {n: e for n, e in zip(ctx.plain_params, exps) if e},
            "num": str(r.numerator),
            "den": str(r.denominator),
        })
    return out


def poly_to_json(p: DiffPoly) -> dict:
    ctx = p.ctx
    terms = []
    for key in sorted_keys(p.terms):
        grades, ev, od = key
        terms.append({
            "coeff": coeff_to_json(ctx, p.terms[key]),
            "grades": {n: e for (n, _), e in zip(ctx.graded_params, grades) if e},
            "even": [[gen_name(g), e] for g, e in ev],
            "odd": [gen_name(o) for o in od],
        })
    return {"text": format_poly(p), "terms": terms}


def poly_from_json(data: dict, ctx: JetContext) -> DiffPoly:
    out = ctx.zero_poly()
    for t in data["terms"]:
        c = ctx.zero_poly()
        for piece in t["coeff"]:
            term = ctx.const(Fraction(int(piece["num"]), int(piece["den"])))
            for n, e in piece["params"].items():
                term = term * ctx.param(n, e)
            c = c + term
        for n, e in t["grades"].items():
            c = c * ctx.param(n, e)
        for name, e in t["even"]:
            c = c * parse_poly(name, ctx) ** e
        for name in t["odd"]:
            c = c * parse_poly(name, ctx)
        out = out + c
    return out
