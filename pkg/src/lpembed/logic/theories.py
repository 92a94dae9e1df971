"""Concrete theories: the positive-part Lp axiom schema and the finite stages T_n.

Sentences about a binary tree of constants c_sigma say, up to depth n, that
sigma -> c_sigma is an L^r-formal disintegration with ||c_sigma|| = 2^(-|sigma|/r):

* phi(sigma, s)      d(s c_sigma, s c_sigma0 + s c_sigma1)              |s| <= 1/2
* psi(sigma, s, t)   | ||s c_sigma0 + t c_sigma1||^r
                       - |s|^r ||c_sigma0||^r - |t|^r ||c_sigma1||^r |     |s| + |t| <= 1
* gamma(sigma)       | ||c_sigma|| - 2^(-|sigma|/r) |

Scalar families are discretised on rational grids.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from lpembed.embedding import EmbeddedBasis, dyadic_interval, leaf_index
from lpembed.logic import syntax as ast
from lpembed.logic.evaluate import QuantifierBudget, TruthValue, evaluate
from lpembed.logic.models import Interpretation, LatticeModel
from lpembed.spaces import DyadicStep

Bits = tuple[int, ...]


@dataclass(frozen=True)
class Sentence:
    name: str
    formula: ast.Formula
    family: str = ""

    def __post_init__(self):
        if not ast.is_sentence(self.formula):
            raise ValueError(f"{self.name} has free variables {sorted(ast.free_variables(self.formula))}")

    @property
    def text(self) -> str:
        return ast.to_text(self.formula)


def rational_grid(max_den: int = 8, lo=-1, hi=1) -> list[Fraction]:
    """All rationals in [lo, hi] with denominator at most ``max_den``."""
    lo, hi = Fraction(lo), Fraction(hi)
    vals = {
        Fraction(num, den)
        for den in range(1, max_den + 1)
        for num in range(math.floor(lo * den), math.ceil(hi * den) + 1)
    }
    return sorted(v for v in vals if lo <= v <= hi)


def lp_axiom_grid(max_den: int = 2) -> list[tuple[Fraction, Fraction]]:
    vals = rational_grid(max_den, 0, 1)
    return [(s, t) for s in vals for t in vals if s + t <= 1]


def phi_grid(max_den: int = 8) -> list[Fraction]:
    return rational_grid(max_den, Fraction(-1, 2), Fraction(1, 2))


def psi_grid(max_den: int = 8) -> list[tuple[Fraction, Fraction]]:
    vals = rational_grid(max_den)
    return [(s, t) for s in vals for t in vals if abs(s) + abs(t) <= 1]


def _exponent(x) -> Fraction:
    return ast.scalar(x)


def axiom_lp_positive(p, s, t) -> ast.Formula:
    """sup_{x0,x1} ( ||s x0^+||^p + ||t x1^+||^p  leq  ||s x0^+ + t x1^+||^p )."""
    s, t, k = ast.scalar(s), ast.scalar(t), _exponent(p)
    u, v = ast.pos(ast.Var("x0")), ast.pos(ast.Var("x1"))
    lhs = ast.Add(ast.Pow(ast.Norm(ast.scale(s, u)), k), ast.Pow(ast.Norm(ast.scale(t, v)), k))
    rhs = ast.Pow(ast.Norm(ast.combo(s, u, t, v)), k)
    return ast.sup(["x0", "x1"], ast.leq(lhs, rhs))


def axioms_T_lp_real(p, grid: Iterable[tuple]) -> list[Sentence]:
    """One sentence per (s, t) with 0 <= s <= 1 and 0 <= t <= 1 - s."""
    if p < 1:
        raise ValueError("p must be >= 1")
    out = []
    for s, t in grid:
        s, t = ast.scalar(s), ast.scalar(t)
        if not (0 <= s <= 1 and 0 <= t <= 1 - s):
            raise ValueError(f"grid point ({s}, {t}) outside 0 <= s <= 1, 0 <= t <= 1 - s")
        name = f"Lp[{ast.fmt_scalar(s)},{ast.fmt_scalar(t)}]"
        out.append(Sentence(name, axiom_lp_positive(p, s, t), "Lp"))
    return out


def const_name(sigma: Sequence[int]) -> str:
    return "c_" + ("".join(str(b) for b in sigma) if sigma else "e")


def parse_const_name(name: str) -> Bits | None:
    if not name.startswith("c_"):
        return None
    body = name[2:]
    if body == "e":
        return ()
    if body and set(body) <= {"0", "1"}:
        return tuple(int(b) for b in body)
    return None


def _c(sigma) -> ast.Const:
    return ast.Const(const_name(sigma))


def sentence_phi(sigma: Bits, s) -> Sentence:
    s = ast.scalar(s)
    if abs(s) > Fraction(1, 2):
        raise ValueError(f"phi needs |s| <= 1/2, got {s}")
    sigma = tuple(sigma)
    f = ast.Dist(ast.scale(s, _c(sigma)), ast.combo(s, _c(sigma + (0,)), s, _c(sigma + (1,))))
    return Sentence(f"Phi[{const_name(sigma)},{ast.fmt_scalar(s)}]", f, "Phi")


def sentence_psi(sigma: Bits, s, t, r) -> Sentence:
    s, t, k = ast.scalar(s), ast.scalar(t), _exponent(r)
    if abs(s) + abs(t) > 1:
        raise ValueError(f"psi needs |s| + |t| <= 1, got ({s}, {t})")
    sigma = tuple(sigma)
    c0, c1 = _c(sigma + (0,)), _c(sigma + (1,))
    lhs = ast.Pow(ast.Norm(ast.combo(s, c0, t, c1)), k)
    rhs = ast.Add(
        ast.Scale(Fraction(abs(float(s)) ** float(k)), ast.Pow(ast.Norm(c0), k)),
        ast.Scale(Fraction(abs(float(t)) ** float(k)), ast.Pow(ast.Norm(c1), k)),
    )
    return Sentence(
        f"Psi[{const_name(sigma)},{ast.fmt_scalar(s)},{ast.fmt_scalar(t)}]", ast.absdiff(lhs, rhs), "Psi"
    )


def gamma_target(sigma: Sequence[int], r) -> float:
    return 2.0 ** (-len(sigma) / float(r))


def sentence_gamma(sigma: Bits, r) -> Sentence:
    sigma = tuple(sigma)
    f = ast.absdiff(ast.Norm(_c(sigma)), ast.Lit(Fraction(gamma_target(sigma, r))))
    return Sentence(f"Gamma[{const_name(sigma)}]", f, "Gamma")


def sentences_phi_psi_gamma(
    sigma: Sequence[int],
    r,
    phi_scalars: Iterable | None = None,
    psi_pairs: Iterable[tuple] | None = None,
) -> list[Sentence]:
    """The Phi, Psi and Gamma sentences attached to one node sigma."""
    sigma = tuple(int(b) for b in sigma)
    if any(b not in (0, 1) for b in sigma):
        raise ValueError("sigma must be a binary string")
    phi_scalars = phi_grid() if phi_scalars is None else phi_scalars
    psi_pairs = psi_grid() if psi_pairs is None else psi_pairs
    out = [sentence_phi(sigma, s) for s in phi_scalars]
    out += [sentence_psi(sigma, s, t, r) for s, t in psi_pairs]
    out.append(sentence_gamma(sigma, r))
    return out


def binary_strings(max_len: int) -> list[Bits]:
    return [bits for k in range(max_len + 1) for bits in itertools.product((0, 1), repeat=k)]


def theory_T_n(
    n: int,
    r,
    p,
    phi_scalars: Iterable | None = None,
    psi_pairs: Iterable[tuple] | None = None,
    lp_grid: Iterable[tuple] | None = None,
    include_lattice_axioms: bool = True,
) -> list[Sentence]:
    """Lp axioms (real case), Phi for |sigma| < n, Psi and Gamma for |sigma| <= n.

    Phi at a leaf would assert c_sigma = 0 because every constant below depth
    n is interpreted as 0, so the summation sentences stop one level early.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    phi_scalars = list(phi_grid() if phi_scalars is None else phi_scalars)
    psi_pairs = list(psi_grid() if psi_pairs is None else psi_pairs)
    out = axioms_T_lp_real(p, lp_axiom_grid() if lp_grid is None else lp_grid) if include_lattice_axioms else []
    for sigma in binary_strings(n):
        out.extend(sentences_phi_psi_gamma(sigma, r, phi_scalars if len(sigma) < n else (), psi_pairs))
    return out


def build_Tn_model(n: int, r: float, p: float, basis: EmbeddedBasis | None = None) -> Interpretation:
    """The interpretation satisfying T_n built from an embedding of l^r.

    Leaves (|sigma| = n) are 2^(-n/r) f_nu(sigma) where nu(sigma) reads sigma
    as a base-2 integer, inner nodes are sums of their two children, and
    c_sigma = 0 below depth n.  Without ``basis`` the exact model is used:
    p = r and f_j = 2^(n/r) times the indicator of the j-th level-n interval.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if basis is None:
        if p != r or not 1 <= r <= 2:
            raise ValueError("the exact model needs 1 <= p == r <= 2")
        model = LatticeModel.dyadic(n, p)
        scale = 2.0 ** (n / r)
        fs = [
            scale * np.asarray(DyadicStep.indicator(*dyadic_interval(_leaf_bits(j, n)), level=n).values)
            for j in range(2 ** n)
        ]
    else:
        if basis.m < 2 ** n:
            raise ValueError(f"basis has {basis.m} vectors, T_{n} needs {2 ** n}")
        if basis.field.value != "real":
            raise ValueError("T_n models are built from real embeddings")
        if (basis.r, basis.p) != (r, p):
            raise ValueError(f"basis exponents ({basis.r}, {basis.p}) differ from ({r}, {p})")
        model = LatticeModel.samples(basis.n_samples, p, basis.norm)
        fs = [np.asarray(f.samples) for f in basis.basis]
    consts: dict[str, np.ndarray] = {}
    leaf_scale = 2.0 ** (-n / r)
    for sigma in itertools.product((0, 1), repeat=n):
        consts[const_name(sigma)] = leaf_scale * fs[leaf_index(sigma)]
    for k in range(n - 1, -1, -1):
        for sigma in itertools.product((0, 1), repeat=k):
            consts[const_name(sigma)] = consts[const_name(sigma + (0,))] + consts[const_name(sigma + (1,))]
    zero = model.zero()

    def deeper(name: str):
        bits = parse_const_name(name)
        return zero if bits is not None and len(bits) > n else None

    # Monte Carlo norms of inner nodes can overshoot 1 by the sampling error
    ball_tol = 1e-9 if basis is None else 0.1
    return Interpretation(model, consts, default_constant=deeper, ball_tol=ball_tol)


def _leaf_bits(j: int, n: int) -> Bits:
    return tuple((j >> (n - 1 - i)) & 1 for i in range(n))


@dataclass
class SentenceResult:
    name: str
    family: str
    value: float
    lower: float
    upper: float
    passed: bool


@dataclass
class TheoryReport:
    tol: float
    results: list[SentenceResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __bool__(self) -> bool:
        return self.passed

    @property
    def max_value(self) -> float:
        return max((r.value for r in self.results), default=0.0)

    def max_by_family(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for r in self.results:
            out[r.family] = max(out.get(r.family, 0.0), r.value)
        return out

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "passed": self.passed,
            "max_value": self.max_value,
            "max_by_family": self.max_by_family(),
            "sentences": [
                {
                    "sentence": r.name,
                    "family": r.family,
                    "value": r.value,
                    "bracket": [r.lower, r.upper],
                    "pass": r.passed,
                }
                for r in self.results
            ],
        }


def check_theory(
    interp: Interpretation,
    sentences: Iterable[Sentence],
    budget: QuantifierBudget | None = None,
    tol: float = 1e-9,
    family_tol: dict[str, float] | None = None,
) -> TheoryReport:
    """Evaluate every sentence; a sentence passes when its value is <= its tolerance."""
    report = TheoryReport(tol)
    family_tol = family_tol or {}
    for sent in sentences:
        tv: TruthValue = evaluate(sent.formula, interp, budget)
        limit = family_tol.get(sent.family, tol)
        report.results.append(
            SentenceResult(sent.name, sent.family, tv.value, tv.lower, tv.upper, tv.value <= limit)
        )
    return report


def write_theory(sentences: Iterable[Sentence], path) -> None:
    """One ``name<TAB>formula`` line per sentence."""
    with open(path, "w") as fh:
        for s in sentences:
            fh.write(f"{s.name}\t{s.text}\n")


def read_theory(path) -> list[Sentence]:
    from lpembed.logic.parser import parse_formula

    out = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            name, _, text = line.partition("\t")
            family = name.split("[", 1)[0] if "[" in name else ""
            out.append(Sentence(name, parse_formula(text), family))
    return out
