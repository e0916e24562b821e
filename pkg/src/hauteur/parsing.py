"""Parser for rational-function strings like "t^2-1", "2/t", "-(27*t+2)/t^12".

Grammar (recursive descent, explicit multiplication only):

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := ('+'|'-')* power
    power  := atom ('^' integer)?
    atom   := integer | decimal | variable | '(' expr ')'

Errors carry the character position, which the CLI surfaces verbatim.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ConfigError
from .kernel import Poly, RatFunc


class _Tok:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind, value, pos):
        self.kind = kind
        self.value = value
        self.pos = pos


def _tokenize(s, var):
    toks = []
    i, n = 0, len(s)
    while i < n:
        c = s[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/^()":
            toks.append(_Tok(c, c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < n and (s[j].isdigit() or s[j] == "."):
                j += 1
            text = s[i:j]
            try:
                val = Fraction(text)
            except (ValueError, ZeroDivisionError):
                raise ConfigError(
                    f"bad number {text!r} at position {i}", code="parse-error"
                )
            toks.append(_Tok("num", val, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (s[j].isalnum() or s[j] == "_"):
                j += 1
            name = s[i:j]
            if name != var:
                raise ConfigError(
                    f"unknown symbol {name!r} at position {i} (variable is {var!r})",
                    code="parse-error",
                )
            toks.append(_Tok("var", name, i))
            i = j
            continue
        raise ConfigError(f"unexpected character {c!r} at position {i}", code="parse-error")
    toks.append(_Tok("end", None, n))
    return toks


class _Parser:
    def __init__(self, toks, text):
        self.toks = toks
        self.text = text
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        t = self.toks[self.i]
        if kind is not None and t.kind != kind:
            raise ConfigError(
                f"expected {kind!r} at position {t.pos} in {self.text!r}",
                code="parse-error",
            )
        self.i += 1
        return t

    def expr(self):
        v = self.term()
        while self.peek().kind in "+-":
            op = self.take().kind
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self):
        v = self.unary()
        while self.peek().kind in "*/":
            op = self.take()
            rhs = self.unary()
            if op.kind == "*":
                v = v * rhs
            else:
                if rhs.is_zero:
                    raise ConfigError(
                        f"division by zero at position {op.pos}", code="parse-error"
                    )
                v = v / rhs
        return v

    def unary(self):
        sign = 1
        while self.peek().kind in "+-":
            if self.take().kind == "-":
                sign = -sign
        v = self.power()
        return v if sign == 1 else -v

    def power(self):
        v = self.atom()
        if self.peek().kind == "^":
            op = self.take()
            neg = False
            if self.peek().kind == "-":
                self.take()
                neg = True
            t = self.take("num")
            if t.value.denominator != 1:
                raise ConfigError(
                    f"non-integer exponent at position {t.pos}", code="parse-error"
                )
            e = int(t.value)
            if neg:
                e = -e
            if e < 0 and v.is_zero:
                raise ConfigError(
                    f"zero to a negative power at position {op.pos}", code="parse-error"
                )
            v = v ** e
        return v

    def atom(self):
        t = self.peek()
        if t.kind == "num":
            self.take()
            return RatFunc.constant(t.value)
        if t.kind == "var":
            self.take()
            return RatFunc(Poly.x())
        if t.kind == "(":
            self.take()
            v = self.expr()
            self.take(")")
            return v
        raise ConfigError(
            f"unexpected {t.kind!r} at position {t.pos} in {self.text!r}",
            code="parse-error",
        )


def parse_ratfunc(s, var="t"):
    """Parse a rational-function string into a RatFunc over Q."""
    if not isinstance(s, str):
        raise ConfigError(f"expected a string, got {type(s).__name__}", code="parse-error")
    p = _Parser(_tokenize(s, var), s)
    v = p.expr()
    p.take("end")
    return v


def format_ratfunc(f, var="t"):
    """Inverse-ish of parse_ratfunc: a string the parser round-trips."""
    def poly_str(p):
        if p.is_zero:
            return "0"
        parts = []
        for k in range(p.degree, -1, -1):
            c = p.coeffs[k]
            if c == 0:
                continue
            if k == 0:
                mon = ""
            elif k == 1:
                mon = var
            else:
                mon = f"{var}^{k}"
            if c == 1 and mon:
                cs = mon
            elif c == -1 and mon:
                cs = f"-{mon}"
            else:
                num = str(c) if c.denominator != 1 else str(c.numerator)
                if "/" in num and mon:
                    num = f"({num})"
                cs = f"{num}*{mon}" if mon else num
            parts.append(cs)
        out = parts[0]
        for p_ in parts[1:]:
            out += p_ if p_.startswith("-") else "+" + p_
        return out

    if f.den == Poly.one():
        return poly_str(f.num)
    return f"({poly_str(f.num)})/({poly_str(f.den)})"
