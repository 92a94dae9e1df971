"""Complexification of real step-function lattices.

A :class:`ComplexPair` is ``re + i im`` with both parts real
:class:`DyadicStep` functions.  The modulus sup_theta Re(e^{i theta} v) is
approximated on a uniform angle grid with lattice joins, and the checks at
the bottom decide whether a candidate norm on pairs makes the
complexification an abstract complex Lp space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from lpembed.reports import CheckReport
from lpembed.spaces import DyadicStep, Field, common_level, disjointify, join, lp_norm, meet, modulus


@dataclass(frozen=True, eq=False)
class ComplexPair:
    re: DyadicStep
    im: DyadicStep

    def __post_init__(self):
        if self.re.is_complex or self.im.is_complex:
            raise ValueError("both parts of a complex pair must be real step functions")
        re, im = common_level(self.re, self.im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def real(cls, v: DyadicStep) -> "ComplexPair":
        """v + i0."""
        return cls(v, DyadicStep.zero(v.level))

    @classmethod
    def imaginary(cls, v: DyadicStep) -> "ComplexPair":
        """0 + iv."""
        return cls(DyadicStep.zero(v.level), v)

    @classmethod
    def from_step(cls, f: DyadicStep) -> "ComplexPair":
        vals = np.asarray(f.values, dtype=np.complex128)
        return cls(DyadicStep(f.level, vals.real), DyadicStep(f.level, vals.imag))

    def to_step(self) -> DyadicStep:
        return DyadicStep(self.re.level, self.re.values + 1j * self.im.values, Field.COMPLEX)

    @property
    def level(self) -> int:
        return self.re.level

    def __add__(self, other: "ComplexPair") -> "ComplexPair":
        return ComplexPair(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexPair") -> "ComplexPair":
        return ComplexPair(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ComplexPair":
        return ComplexPair(-self.re, -self.im)

    def __rmul__(self, z) -> "ComplexPair":
        return complex_scale(z, self)

    def __mul__(self, z) -> "ComplexPair":
        return complex_scale(z, self)

    def equals(self, other: "ComplexPair") -> bool:
        return self.re.equals(other.re) and self.im.equals(other.im)

    def to_record(self) -> dict:
        return {"field": Field.COMPLEX.value, "re": self.re.to_record(), "im": self.im.to_record()}

    @classmethod
    def from_record(cls, record: dict) -> "ComplexPair":
        return cls(DyadicStep.from_record(record["re"]), DyadicStep.from_record(record["im"]))


def complex_scale(z, v: ComplexPair) -> ComplexPair:
    """(x + iy)(v0, v1) = (x v0 - y v1, y v0 + x v1)."""
    z = complex(z)
    x, y = z.real, z.imag
    return ComplexPair(x * v.re - y * v.im, y * v.re + x * v.im)


def _grid_angle(k: int, K: int) -> tuple[float, float]:
    """(cos, sin) of 2 pi k / K, exact at multiples of pi/2."""
    if (4 * k) % K == 0:
        quarter = (4 * k // K) % 4
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][quarter]
    theta = 2 * math.pi * k / K
    return math.cos(theta), math.sin(theta)


def modulus_theta_grid(v: ComplexPair, K: int = 256) -> DyadicStep:
    """Lattice join over theta = 2 pi k / K of Re(e^{i theta} v) = cos(theta) re - sin(theta) im.

    Pointwise this is at most |v| and at least cos(pi / K) |v|.
    """
    if K < 4:
        raise ValueError("K must be at least 4")
    out = None
    for k in range(K):
        c, s = _grid_angle(k, K)
        part = c * v.re - s * v.im
        out = part if out is None else join(out, part)
    return out


def theta_grid_bound(K: int) -> float:
    return 1.0 - math.cos(math.pi / K)


def complex_lp_norm(v: ComplexPair, p: float) -> float:
    """p-norm of the pointwise modulus |re + i im|."""
    return lp_norm(DyadicStep(v.level, np.hypot(v.re.values, v.im.values)), p)


def sum_of_parts_norm(v: ComplexPair, p: float) -> float:
    """||re|| + ||im||: a norm on pairs that is not an Lp norm (used as a negative control)."""
    return lp_norm(v.re, p) + lp_norm(v.im, p)


def leq(s: float, t: float) -> float:
    """The connective leq(s, t) = |t - max(s, t)|."""
    return abs(t - max(s, t))


def eval_G_functionals(
    u0: DyadicStep,
    u1: DyadicStep,
    v0: DyadicStep,
    v1: DyadicStep,
    alpha: complex,
    beta: complex,
    p: float,
    norm_b: Callable[[DyadicStep], float] | None = None,
    norm_c: Callable[[ComplexPair], float] | None = None,
) -> tuple[float, float, float]:
    """(G0, G1, G2) for the candidate complex norm ``norm_c``.

    G0 = leq(max ||v_j - u_j||, || |v0| meet |v1| ||)
    G1 = | ||alpha u0 + beta u1||^p - |alpha|^p ||u0||^p - |beta|^p ||u1||^p |
    G2 = | ||v0 + i0|| - ||v0|| |
    """
    norm_b = norm_b or (lambda f: lp_norm(f, p))
    norm_c = norm_c or (lambda w: complex_lp_norm(w, p))
    overlap = norm_b(meet(modulus(v0), modulus(v1)))
    g0 = leq(max(norm_b(v0 - u0), norm_b(v1 - u1)), overlap)
    w = complex_scale(alpha, ComplexPair.real(u0)) + complex_scale(beta, ComplexPair.real(u1))
    g1 = abs(norm_c(w) ** p - abs(alpha) ** p * norm_b(u0) ** p - abs(beta) ** p * norm_b(u1) ** p)
    g2 = abs(norm_c(ComplexPair.real(v0)) - norm_b(v0))
    return g0, g1, g2


def complex_condition_residual(
    v0: DyadicStep,
    v1: DyadicStep,
    alpha: complex,
    beta: complex,
    p: float,
    norm_b=None,
    norm_c=None,
) -> float:
    """max(G0, G1, G2) at the disjointified witness (u0, u1) = disjointify(v0, v1).

    This is an upper bound for the infimum over (u0, u1).
    """
    u0, u1 = disjointify(v0, v1)
    return max(eval_G_functionals(u0, u1, v0, v1, alpha, beta, p, norm_b, norm_c))


@dataclass
class ComplexModel:
    """Real step functions of one level, their p-norm, and a candidate norm on pairs."""

    level: int
    p: float
    norm_c: Callable[[ComplexPair], float]
    name: str = "candidate"

    def norm_b(self, f: DyadicStep) -> float:
        return lp_norm(f, self.p)

    @classmethod
    def genuine(cls, level: int, p: float) -> "ComplexModel":
        return cls(level, p, lambda w: complex_lp_norm(w, p), "genuine complex Lp")

    @classmethod
    def sum_of_parts(cls, level: int, p: float) -> "ComplexModel":
        return cls(level, p, lambda w: sum_of_parts_norm(w, p), "||re|| + ||im||")


def _random_disjoint_pair(rng: np.random.Generator, level: int) -> tuple[DyadicStep, DyadicStep]:
    k = 2 ** level
    vals = rng.normal(size=k)
    mask = rng.random(k) < 0.5
    zero_out = rng.random(k) < 0.2
    a = np.where(mask & ~zero_out, vals, 0.0)
    b = np.where(~mask & ~zero_out, rng.normal(size=k), 0.0)
    return DyadicStep(level, a), DyadicStep(level, b)


def _random_complex(rng: np.random.Generator) -> complex:
    return complex(rng.normal(), rng.normal())


def check_abstract_complex_lp(
    model: ComplexModel, trials: int = 100, tol: float = 1e-10, seed: int = 0
) -> dict[str, CheckReport]:
    """Test both defining conditions of an abstract complex Lp space.

    ``condition_1``: ||v + i0|| = ||v|| on random real v (the companion
    identity ||0 + iv|| = ||v|| is reported as ``condition_1_imag``).
    ``condition_2``: the formal disjointness identity for disjoint real v0, v1
    and complex alpha, beta; the disjoint halves of [0, 1] with alpha = 1,
    beta = i are always included.  Overall pass requires all reports to pass.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    level, p = model.level, model.p
    c1 = CheckReport("condition_1", tol)
    c1i = CheckReport("condition_1_imag", tol)
    c2 = CheckReport("condition_2", tol)
    for i in range(trials):
        v = DyadicStep(level, rng.normal(size=2 ** level))
        c1.record(abs(model.norm_c(ComplexPair.real(v)) - model.norm_b(v)), trial=i)
        c1i.record(abs(model.norm_c(ComplexPair.imaginary(v)) - model.norm_b(v)), trial=i)
    half = max(level, 1)
    witnesses = [
        (DyadicStep.indicator(0, 0.5, half), DyadicStep.indicator(0.5, 1, half), 1.0, 1j, "indicator witness")
    ]
    for i in range(trials):
        v0, v1 = _random_disjoint_pair(rng, level)
        witnesses.append((v0, v1, _random_complex(rng), _random_complex(rng), f"trial {i}"))
    for v0, v1, alpha, beta, label in witnesses:
        w = complex_scale(alpha, ComplexPair.real(v0)) + complex_scale(beta, ComplexPair.real(v1))
        lhs = model.norm_c(w) ** p
        rhs = abs(alpha) ** p * model.norm_b(v0) ** p + abs(beta) ** p * model.norm_b(v1) ** p
        alpha, beta = complex(alpha), complex(beta)
        c2.record(abs(lhs - rhs), witness=label, alpha=[alpha.real, alpha.imag], beta=[beta.real, beta.imag])
    return {"condition_1": c1, "condition_1_imag": c1i, "condition_2": c2}


def failed_conditions(reports: dict[str, CheckReport]) -> list[str]:
    return [name for name, rep in reports.items() if not rep.passed]
