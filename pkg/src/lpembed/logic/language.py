"""Metric languages for normed spaces, Banach lattices and complexified lattices.

Each function or relation symbol carries a modulus ``delta``.  It is read as:
inputs within norm distance eps move the output by at most ``delta(eps)``
(norm distance for function symbols, absolute value for relations).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str  # "function", "relation" or "constant"
    arity: int
    modulus: Callable[[float], float] | None = None
    indexed: bool = False  # one symbol per admissible scalar pair (s, t)


@dataclass(frozen=True)
class Language:
    name: str
    symbols: tuple[Symbol, ...]

    def __contains__(self, name: str) -> bool:
        return any(sym.name == name for sym in self.symbols)

    def __getitem__(self, name: str) -> Symbol:
        for sym in self.symbols:
            if sym.name == name:
                return sym
        raise KeyError(name)

    @property
    def names(self) -> frozenset[str]:
        return frozenset(sym.name for sym in self.symbols)

    def issubset(self, other: "Language") -> bool:
        return self.names <= other.names

    def extend(self, name: str, *symbols: Symbol) -> "Language":
        return Language(name, self.symbols + tuple(symbols))

    def with_constants(self, names) -> "Language":
        extra = tuple(Symbol(n, "constant", 0) for n in names if n not in self)
        return Language(self.name + "+", self.symbols + extra)


L_BANACH = Language(
    "L_Banach",
    (
        Symbol("d", "relation", 2, lambda eps: eps),
        Symbol("oplus", "function", 2, lambda eps: 2 * eps, indexed=True),
        Symbol("norm", "relation", 1, lambda eps: eps),
        Symbol("0", "constant", 0),
    ),
)

L_BLATTICE = L_BANACH.extend(
    "L_B-Lattice",
    Symbol("meet", "function", 2, lambda eps: 2 * eps, indexed=True),
    Symbol("abs", "function", 1, lambda eps: eps),
)

L_LPC = L_BLATTICE.extend("L_Lp(C)", Symbol("normplus", "relation", 2, lambda eps: 2 * eps))
