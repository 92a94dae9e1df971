"""Recursive-descent parser for the formula syntax.

Grammar (``NUMBER`` is an unsigned integer, decimal or ratio such as ``3/4``)::

    formula   := ("sup" | "inf") IDENT ("," IDENT)* "." formula | additive
    additive  := mult (("+" | "-") mult)*
    mult      := ["-"] NUMBER "*" mult | "-" NUMBER | power
    power     := primary ["^" NUMBER]
    primary   := NUMBER | "(" formula ")"
               | "d" "(" term "," term ")" | "norm" "(" term ")"
               | "normplus" "(" term "," term ")"
               | CONNECTIVE "(" formula ("," formula)* ")"
    term      := scaled [("+" | "-") scaled]
    scaled    := ["-"] [NUMBER "*"] atom
    atom      := "0" | IDENT | "(" term ")" | "abs" "(" term ")" | "pos" "(" term ")"
               | ("oplus" | "meet" | "join") "[" SCALAR "," SCALAR "]" "(" term "," term ")"
    SCALAR    := ["-"] NUMBER

Identifiers bound by an enclosing quantifier are variables; all other
identifiers are constant symbols.  ``s*x`` abbreviates ``oplus[s,0](x, 0)``;
``join`` and ``pos`` expand into ``oplus``/``meet`` terms.
"""

from __future__ import annotations

import re
from fractions import Fraction

from lpembed.logic import syntax as ast
from lpembed.logic.syntax import CONNECTIVES, SubscriptError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?(?:/\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[()\[\],.+\-*^]))"
)
KEYWORDS = {"sup", "inf", "d", "norm", "normplus", "abs", "pos", "oplus", "meet", "join"} | set(CONNECTIVES)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str):
        super().__init__(f"{message} at position {position}: {text[:position]}>>>{text[position:]}")
        self.position = position


class SubscriptConstraintError(FormulaSyntaxError, SubscriptError):
    """A scalar subscript pair violating |s| + |t| <= 1, with its position."""


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise FormulaSyntaxError("unexpected character", start, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _number(tok: str) -> Fraction:
    if "/" in tok:
        num, den = tok.split("/")
        return Fraction(num) / Fraction(den)
    return Fraction(tok)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.bound: list[str] = []

    # -- helpers
    def peek(self, offset: int = 0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def error(self, message: str):
        raise FormulaSyntaxError(message, self.peek()[2], self.text)

    def accept(self, value: str) -> bool:
        kind, val, _ = self.peek()
        if kind in ("op", "ident") and val == value:
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.accept(value):
            self.error(f"expected {value!r}")

    def ident(self) -> str:
        kind, val, _ = self.peek()
        if kind != "ident" or val in KEYWORDS:
            self.error("expected an identifier")
        self.i += 1
        return val

    def number(self) -> Fraction:
        kind, val, _ = self.peek()
        if kind != "num":
            self.error("expected a number")
        self.i += 1
        return _number(val)

    def signed_number(self) -> Fraction:
        neg = self.accept("-")
        x = self.number()
        return -x if neg else x

    # -- formulas
    def formula(self):
        kind, val, _ = self.peek()
        if kind == "ident" and val in ("sup", "inf"):
            self.i += 1
            names = [self.ident()]
            while self.accept(","):
                names.append(self.ident())
            self.expect(".")
            self.bound.extend(names)
            body = self.formula()
            del self.bound[-len(names):]
            for name in reversed(names):
                body = ast.Quant(val, name, body)
            return body
        return self.additive()

    def additive(self):
        left = self.mult()
        while True:
            if self.accept("+"):
                left = ast.Add(left, self.mult())
            elif self.accept("-"):
                left = ast.Sub(left, self.mult())
            else:
                return left

    def mult(self):
        start = self.i
        neg = self.accept("-")
        if self.peek()[0] == "num" and (neg or self.peek(1)[1] in ("*",)):
            k = self.number()
            k = -k if neg else k
            if self.accept("*"):
                return ast.Scale(k, self.mult())
            if neg:
                return ast.Lit(k)
        elif neg:
            self.error("'-' must be followed by a number")
        self.i = start if not neg else self.i
        return self.power()

    def power(self):
        base = self.primary()
        if self.accept("^"):
            return ast.Pow(base, self.number())
        return base

    def primary(self):
        kind, val, _ = self.peek()
        if kind == "num":
            self.i += 1
            return ast.Lit(_number(val))
        if self.accept("("):
            inner = self.formula()
            self.expect(")")
            return inner
        if kind != "ident":
            self.error("expected a formula")
        self.i += 1
        if val == "d":
            self.expect("(")
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            return ast.Dist(a, b)
        if val == "norm":
            self.expect("(")
            a = self.term()
            self.expect(")")
            return ast.Norm(a)
        if val == "normplus":
            self.expect("(")
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            return ast.NormPlus(a, b)
        if val in CONNECTIVES:
            self.expect("(")
            args = [self.formula()]
            while self.accept(","):
                args.append(self.formula())
            self.expect(")")
            try:
                return ast.Conn(val, tuple(args))
            except ValueError as exc:
                self.i -= 1
                self.error(str(exc))
        self.i -= 1
        self.error(f"unknown formula head {val!r}")

    # -- terms
    def term(self):
        s, left, explicit = self.scaled()
        pos = self.peek()[2]
        if self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            negate = self.peek()[1] == "-"
            self.i += 1
            t, right, _ = self.scaled()
            if negate:
                t = -t
            return self._oplus(s, t, left, right, pos)
        if explicit:
            return self._oplus(s, Fraction(0), left, ast.Zero(), pos)
        return left

    def _oplus(self, s, t, left, right, pos):
        try:
            return ast.Oplus(s, t, left, right)
        except SubscriptError as exc:
            raise SubscriptConstraintError(str(exc), pos, self.text) from None

    def scaled(self):
        neg = self.accept("-")
        if self.peek()[0] == "num" and self.peek(1)[1] == "*":
            k = self.number()
            self.expect("*")
            return (-k if neg else k), self.atom(), True
        atom = self.atom()
        if neg:
            return Fraction(-1), atom, True
        return Fraction(1), atom, False

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            if _number(val) != 0:
                self.error("only 0 may appear as a vector literal")
            self.i += 1
            return ast.Zero()
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        if kind != "ident":
            self.error("expected a term")
        self.i += 1
        if val in ("abs", "pos"):
            self.expect("(")
            a = self.term()
            self.expect(")")
            return ast.Abs(a) if val == "abs" else ast.pos(a)
        if val in ("oplus", "meet", "join"):
            self.expect("[")
            s = self.signed_number()
            self.expect(",")
            t = self.signed_number()
            self.expect("]")
            self.expect("(")
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            build = {"oplus": ast.Oplus, "meet": ast.Meet, "join": ast.join}[val]
            try:
                return build(s, t, a, b)
            except SubscriptError as exc:
                raise SubscriptConstraintError(str(exc), pos, self.text) from None
        if val in KEYWORDS:
            self.i -= 1
            self.error(f"{val!r} is not a term")
        return ast.Var(val) if val in self.bound else ast.Const(val)


def parse_formula(text: str):
    """Parse a formula; raises :class:`FormulaSyntaxError` (with position) on bad input."""
    p = _Parser(text)
    f = p.formula()
    if p.peek()[0] != "end":
        p.error("unexpected trailing input")
    return f


def parse_term(text: str):
    p = _Parser(text)
    t = p.term()
    if p.peek()[0] != "end":
        p.error("unexpected trailing input")
    return t
