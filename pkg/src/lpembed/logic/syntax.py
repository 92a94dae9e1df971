"""Formula AST for the continuous-logic kernel, with a canonical printer.

Terms denote vectors in the unit ball; formulas denote real numbers that are
clipped into [0, 1] wherever a truth value is required (the result of an
evaluation and every quantifier body).  A compound arithmetic expression over
atomic formulas is therefore one continuous connective [0,1]^n -> [0,1].

Scalars are :class:`fractions.Fraction` so that the subscript constraint
|s| + |t| <= 1 on the vector-space and lattice symbols is checked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class SubscriptError(ValueError):
    """A scalar subscript pair violates |s| + |t| <= 1."""


def scalar(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(str(x)) if isinstance(x, str) else Fraction(x)


def fmt_scalar(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _check_pair(s: Fraction, t: Fraction, symbol: str) -> None:
    if abs(s) + abs(t) > 1:
        raise SubscriptError(f"{symbol}[{fmt_scalar(s)},{fmt_scalar(t)}] needs |s| + |t| <= 1")


# -- terms ---------------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    def __str__(self):
        return "0"


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Oplus:
    """s*left + t*right."""

    s: Fraction
    t: Fraction
    left: "Term"
    right: "Term"

    def __post_init__(self):
        object.__setattr__(self, "s", scalar(self.s))
        object.__setattr__(self, "t", scalar(self.t))
        _check_pair(self.s, self.t, "oplus")

    def __str__(self):
        return _term_body(self)


@dataclass(frozen=True)
class Meet:
    """(s*left) meet (t*right), the pointwise minimum."""

    s: Fraction
    t: Fraction
    left: "Term"
    right: "Term"

    def __post_init__(self):
        object.__setattr__(self, "s", scalar(self.s))
        object.__setattr__(self, "t", scalar(self.t))
        _check_pair(self.s, self.t, "meet")

    def __str__(self):
        return f"meet[{fmt_scalar(self.s)},{fmt_scalar(self.t)}]({self.left}, {self.right})"


@dataclass(frozen=True)
class Abs:
    arg: "Term"

    def __str__(self):
        return f"abs({self.arg})"


Term = Union[Zero, Const, Var, Oplus, Meet, Abs]


def scale(s, x: Term) -> Oplus:
    return Oplus(s, 0, x, Zero())


def combo(s, x: Term, t, y: Term) -> Oplus:
    return Oplus(s, t, x, y)


def join(s, t, x: Term, y: Term) -> Oplus:
    """(s x) join (t y) := -((-s) x meet (-t) y)."""
    return Oplus(-1, 0, Meet(-scalar(s), -scalar(t), x, y), Zero())


def pos(x: Term) -> Oplus:
    """x^+ := (1 x) join (0 x)."""
    return join(1, 0, x, x)


def _term_body(t: Term) -> str:
    if isinstance(t, Oplus):
        if t.t == 0 and t.right == Zero():
            return f"{fmt_scalar(t.s)}*{_term_atom(t.left)}"
        return f"{fmt_scalar(t.s)}*{_term_atom(t.left)} + {fmt_scalar(t.t)}*{_term_atom(t.right)}"
    return str(t)


def _term_atom(t: Term) -> str:
    if isinstance(t, Oplus):
        return f"({_term_body(t)})"
    return str(t)


# -- formulas ------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", scalar(self.value))


@dataclass(frozen=True)
class Dist:
    """d(a, b) = ||a - b|| / 2."""

    a: Term
    b: Term


@dataclass(frozen=True)
class Norm:
    a: Term


@dataclass(frozen=True)
class NormPlus:
    """||a + i b|| in the complexified model."""

    a: Term
    b: Term


CONNECTIVES = {"absdiff": 2, "max": None, "min": None, "monus": 2, "leq": 2}


@dataclass(frozen=True)
class Conn:
    name: str
    args: tuple["Formula", ...]

    def __post_init__(self):
        if self.name not in CONNECTIVES:
            raise ValueError(f"unknown connective {self.name!r}")
        arity = CONNECTIVES[self.name]
        object.__setattr__(self, "args", tuple(self.args))
        if (arity is not None and len(self.args) != arity) or not self.args:
            raise ValueError(f"{self.name} takes {arity or 'at least one'} argument(s), got {len(self.args)}")


@dataclass(frozen=True)
class Add:
    a: "Formula"
    b: "Formula"


@dataclass(frozen=True)
class Sub:
    a: "Formula"
    b: "Formula"


@dataclass(frozen=True)
class Scale:
    k: Fraction
    a: "Formula"

    def __post_init__(self):
        object.__setattr__(self, "k", scalar(self.k))


@dataclass(frozen=True)
class Pow:
    """max(0, min(1, a)) ** k."""

    a: "Formula"
    k: Fraction

    def __post_init__(self):
        object.__setattr__(self, "k", scalar(self.k))
        if self.k <= 0:
            raise ValueError("exponent must be positive")


@dataclass(frozen=True)
class Quant:
    kind: str
    var: str
    body: "Formula"

    def __post_init__(self):
        if self.kind not in ("sup", "inf"):
            raise ValueError(f"quantifier must be sup or inf, got {self.kind!r}")


Formula = Union[Lit, Dist, Norm, NormPlus, Conn, Add, Sub, Scale, Pow, Quant]


def sup(vars_: str | list[str], body: Formula) -> Formula:
    names = [vars_] if isinstance(vars_, str) else list(vars_)
    for name in reversed(names):
        body = Quant("sup", name, body)
    return body


def inf(vars_: str | list[str], body: Formula) -> Formula:
    names = [vars_] if isinstance(vars_, str) else list(vars_)
    for name in reversed(names):
        body = Quant("inf", name, body)
    return body


def leq(a: Formula, b: Formula) -> Conn:
    """The connective leq(s, t) = |t - max(s, t)|: 0 exactly when s <= t."""
    return Conn("leq", (a, b))


def absdiff(a: Formula, b: Formula) -> Conn:
    return Conn("absdiff", (a, b))


# precedence: 0 additive, 1 multiplicative, 2 power, 3 primary; quantifiers below all
def _prec(f: Formula) -> int:
    if isinstance(f, Quant):
        return -1
    if isinstance(f, (Add, Sub)):
        return 0
    if isinstance(f, Scale) or (isinstance(f, Lit) and f.value < 0):
        return 1
    if isinstance(f, Pow):
        return 2
    return 3


def _wrap(f: Formula, need: int) -> str:
    text = to_text(f)
    return f"({text})" if _prec(f) < need else text


def to_text(f: Formula | Term) -> str:
    """Canonical concrete syntax; ``parse_formula(to_text(f)) == f``."""
    if isinstance(f, (Zero, Const, Var, Oplus, Meet, Abs)):
        return _term_body(f)
    if isinstance(f, Lit):
        return fmt_scalar(f.value)
    if isinstance(f, Dist):
        return f"d({_term_body(f.a)}, {_term_body(f.b)})"
    if isinstance(f, Norm):
        return f"norm({_term_body(f.a)})"
    if isinstance(f, NormPlus):
        return f"normplus({_term_body(f.a)}, {_term_body(f.b)})"
    if isinstance(f, Conn):
        return f"{f.name}({', '.join(to_text(a) for a in f.args)})"
    if isinstance(f, Add):
        return f"{_wrap(f.a, 0)} + {_wrap(f.b, 1)}"
    if isinstance(f, Sub):
        return f"{_wrap(f.a, 0)} - {_wrap(f.b, 1)}"
    if isinstance(f, Scale):
        return f"{fmt_scalar(f.k)}*{_wrap(f.a, 1)}"
    if isinstance(f, Pow):
        return f"{_wrap(f.a, 3)}^{fmt_scalar(f.k)}"
    if isinstance(f, Quant):
        names = [f.var]
        body = f.body
        while isinstance(body, Quant) and body.kind == f.kind:
            names.append(body.var)
            body = body.body
        return f"{f.kind} {', '.join(names)} . {to_text(body)}"
    raise TypeError(f"not a formula node: {f!r}")


def free_variables(f) -> frozenset[str]:
    if isinstance(f, Var):
        return frozenset({f.name})
    if isinstance(f, (Zero, Const, Lit)):
        return frozenset()
    if isinstance(f, Quant):
        return free_variables(f.body) - {f.var}
    if isinstance(f, Conn):
        return frozenset().union(*(free_variables(a) for a in f.args))
    if isinstance(f, (Oplus, Meet)):
        return free_variables(f.left) | free_variables(f.right)
    if isinstance(f, Abs):
        return free_variables(f.arg)
    if isinstance(f, Norm):
        return free_variables(f.a)
    if isinstance(f, (Dist, NormPlus, Add, Sub)):
        return free_variables(f.a) | free_variables(f.b)
    if isinstance(f, (Scale, Pow)):
        return free_variables(f.a)
    raise TypeError(f"not a formula node: {f!r}")


def is_sentence(f: Formula) -> bool:
    return not free_variables(f)


def symbols_used(f) -> frozenset[str]:
    """Names of the language symbols (and constants) occurring in ``f``."""
    out: set[str] = set()

    def walk(node):
        if isinstance(node, Zero):
            out.add("0")
        elif isinstance(node, Const):
            out.add(node.name)
        elif isinstance(node, Oplus):
            out.add("oplus")
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Meet):
            out.add("meet")
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Abs):
            out.add("abs")
            walk(node.arg)
        elif isinstance(node, Dist):
            out.add("d")
            walk(node.a)
            walk(node.b)
        elif isinstance(node, Norm):
            out.add("norm")
            walk(node.a)
        elif isinstance(node, NormPlus):
            out.add("normplus")
            walk(node.a)
            walk(node.b)
        elif isinstance(node, Conn):
            for a in node.args:
                walk(a)
        elif isinstance(node, (Add, Sub)):
            walk(node.a)
            walk(node.b)
        elif isinstance(node, (Scale, Pow)):
            walk(node.a)
        elif isinstance(node, Quant):
            walk(node.body)

    walk(f)
    return frozenset(out)
