"""Dyadic step functions: an exact finite model of Lp([0, 1]) over R or C.

A :class:`DyadicStep` of level ``n`` holds ``2**n`` values; entry ``k`` is the
constant value on ``[k 2**-n, (k+1) 2**-n)``.  Binary operations refine both
operands to the finer level first, so everything here is exact up to
floating point rounding.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class Field(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


class FieldMismatch(TypeError):
    pass


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class DyadicStep:
    level: int
    values: np.ndarray
    field: Field = Field.REAL

    def __post_init__(self):
        field = Field(self.field)
        dtype = np.complex128 if field is Field.COMPLEX else np.float64
        if field is Field.REAL and np.iscomplexobj(self.values):
            raise FieldMismatch("complex values given for a real step function")
        values = np.array(self.values, dtype=dtype)
        if self.level < 0 or values.shape != (2 ** self.level,):
            raise ValueError(f"level {self.level} needs exactly {2 ** self.level} values, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, c, level: int = 0, field: Field = Field.REAL) -> "DyadicStep":
        return cls(level, np.full(2 ** level, c), field)

    @classmethod
    def zero(cls, level: int = 0, field: Field = Field.REAL) -> "DyadicStep":
        return cls.constant(0.0, level, field)

    @classmethod
    def indicator(cls, a: float, b: float, level: int, field: Field = Field.REAL) -> "DyadicStep":
        """Indicator of [a, b); both endpoints must lie on the level grid."""
        lo, hi = a * 2 ** level, b * 2 ** level
        if lo != int(lo) or hi != int(hi) or not 0 <= lo <= hi <= 2 ** level:
            raise ValueError(f"[{a}, {b}) is not a union of level-{level} cells")
        values = np.zeros(2 ** level)
        values[int(lo):int(hi)] = 1.0
        return cls(level, values, field)

    @property
    def is_complex(self) -> bool:
        return self.field is Field.COMPLEX

    def refine(self, level: int) -> "DyadicStep":
        if level < self.level:
            raise ValueError("cannot refine to a coarser level")
        if level == self.level:
            return self
        return DyadicStep(level, np.repeat(self.values, 2 ** (level - self.level)), self.field)

    def as_complex(self) -> "DyadicStep":
        return self if self.is_complex else DyadicStep(self.level, self.values, Field.COMPLEX)

    def equals(self, other: "DyadicStep") -> bool:
        """Equality of the represented functions (exact)."""
        a, b = common_level(self, other)
        return bool(np.array_equal(a.values, b.values))

    # -- vector space ---------------------------------------------------
    def _binary(self, other, op):
        if not isinstance(other, DyadicStep):
            return NotImplemented
        a, b = common_level(self, other)
        return DyadicStep(a.level, op(a.values, b.values), a.field)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if isinstance(scalar, DyadicStep):
            return NotImplemented
        if isinstance(scalar, complex) and scalar.imag != 0 and not self.is_complex:
            raise FieldMismatch("complex scalar applied to a real step function")
        return DyadicStep(self.level, scalar * self.values, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return DyadicStep(self.level, -self.values, self.field)

    def __repr__(self):
        return f"DyadicStep(level={self.level}, values={self.values.tolist()!r}, field={self.field.value!r})"

    # -- serialization --------------------------------------------------
    def to_record(self) -> dict:
        if self.is_complex:
            vals = [[float(z.real), float(z.imag)] for z in self.values]
        else:
            vals = [float(x) for x in self.values]
        return {"field": self.field.value, "level": self.level, "values": vals}

    @classmethod
    def from_record(cls, record: dict) -> "DyadicStep":
        field = Field(record["field"])
        vals = record["values"]
        if field is Field.COMPLEX:
            vals = [complex(re, im) for re, im in vals]
        return cls(int(record["level"]), np.array(vals), field)

    def dumps(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def loads(cls, text: str) -> "DyadicStep":
        return cls.from_record(json.loads(text))


def common_level(*fs: DyadicStep) -> list[DyadicStep]:
    fields = {f.field for f in fs}
    if len(fields) > 1:
        raise FieldMismatch("operands live over different scalar fields")
    level = max(f.level for f in fs)
    return [f.refine(level) for f in fs]


def lp_norm(f: DyadicStep, p: float) -> float:
    """(sum_k |v_k|**p 2**-n) ** (1/p)."""
    p = _check_p(p)
    mass = np.sum(np.abs(f.values) ** p) / 2 ** f.level
    return float(mass ** (1.0 / p))


# -- lattice operations (real only) -------------------------------------


def _require_real(*fs: DyadicStep) -> None:
    for f in fs:
        if f.is_complex:
            raise FieldMismatch("lattice order is only defined on real step functions")


def meet(f: DyadicStep, g: DyadicStep) -> DyadicStep:
    _require_real(f, g)
    a, b = common_level(f, g)
    return DyadicStep(a.level, np.minimum(a.values, b.values))


def join(f: DyadicStep, g: DyadicStep) -> DyadicStep:
    _require_real(f, g)
    a, b = common_level(f, g)
    return DyadicStep(a.level, np.maximum(a.values, b.values))


def abs_(f: DyadicStep) -> DyadicStep:
    return join(f, -f)


def pos_part(f: DyadicStep) -> DyadicStep:
    return join(f, DyadicStep.zero(f.level))


def neg_part(f: DyadicStep) -> DyadicStep:
    return join(-f, DyadicStep.zero(f.level))


def modulus(f: DyadicStep) -> DyadicStep:
    """Pointwise |f| as a real step function; works for either field."""
    return DyadicStep(f.level, np.abs(f.values))


def is_disjointly_supported(f: DyadicStep, g: DyadicStep) -> bool:
    a, b = common_level(f, g)
    return not np.any(np.minimum(np.abs(a.values), np.abs(b.values)))


# -- formal disjointness ------------------------------------------------


@dataclass(frozen=True)
class FormalDisjointness:
    """Outcome of a randomized refutation test; truthy when no identity failed."""

    passed: bool
    worst_residual: float
    worst_scalars: tuple
    trials: int

    def __bool__(self):
        return self.passed


def _adversarial_tuples(n: int, field: Field) -> list[np.ndarray]:
    tuples = [np.eye(n)[j] for j in range(n)]
    signs = np.array([1.0, -1.0] if field is Field.REAL else [1.0, -1.0, 1j, -1j])
    if (len(signs) + 1) ** n <= 1024:
        grid = np.array(np.meshgrid(*[np.append(signs, 0.0)] * n)).reshape(n, -1).T
        tuples.extend(row for row in grid if np.any(row))
    else:
        tuples.append(np.ones(n))
        tuples.append(np.array([(-1.0) ** j for j in range(n)]))
    return tuples


def is_formally_disjoint(
    vs: Sequence,
    p: float,
    norm: Callable | None = None,
    trials: int = 64,
    tol: float = 1e-9,
    seed: int = 0,
    field: Field | None = None,
) -> FormalDisjointness:
    """Test ||sum a_j v_j||**p == sum |a_j|**p ||v_j||**p on sampled scalar tuples.

    Scalars are drawn uniformly from [-1, 1] (the unit disc for the complex
    field) after a deterministic set of unit, sign and zero patterns.  ``norm``
    defaults to :func:`lp_norm`; any vector type closed under ``+`` and scalar
    ``*`` works with a matching norm.
    """
    p = _check_p(p)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    vs = list(vs)
    n = len(vs)
    if n == 0:
        return FormalDisjointness(True, 0.0, (), 0)
    if field is None:
        field = Field.COMPLEX if any(getattr(v, "is_complex", False) for v in vs) else Field.REAL
    rng = np.random.default_rng(seed)
    tuples = _adversarial_tuples(n, field)
    for _ in range(trials):
        if field is Field.COMPLEX:
            rad = np.sqrt(rng.uniform(0, 1, n))
            tuples.append(rad * np.exp(2j * np.pi * rng.uniform(0, 1, n)))
        else:
            tuples.append(rng.uniform(-1, 1, n))
    if norm is None and all(isinstance(v, DyadicStep) for v in vs):
        return _formally_disjoint_steps(vs, p, tuples, tol)
    if norm is None:
        norm = lambda v: lp_norm(v, p)  # noqa: E731
    powers = np.array([norm(v) ** p for v in vs])
    worst, worst_alpha = 0.0, ()
    for alpha in tuples:
        combo = None
        for a, v in zip(alpha, vs):
            a = complex(a) if field is Field.COMPLEX else float(a)
            term = a * v
            combo = term if combo is None else combo + term
        lhs = norm(combo) ** p
        rhs = float(np.sum(np.abs(alpha) ** p * powers))
        residual = abs(lhs - rhs)
        if residual > worst:
            worst, worst_alpha = residual, tuple(alpha.tolist())
    return FormalDisjointness(worst <= tol, worst, worst_alpha, len(tuples))


def _formally_disjoint_steps(vs, p, tuples, tol) -> FormalDisjointness:
    """All scalar tuples at once: one matrix product on the cell values."""
    level = max(v.level for v in vs)
    V = np.stack([v.refine(level).values for v in vs])
    A = np.array(tuples)
    cell = 2.0 ** -level
    lhs = np.sum(np.abs(A @ V) ** p, axis=1) * cell
    powers = np.sum(np.abs(V) ** p, axis=1) * cell
    rhs = np.abs(A) ** p @ powers
    residuals = np.abs(lhs - rhs)
    i = int(np.argmax(residuals))
    worst = float(residuals[i])
    return FormalDisjointness(worst <= tol, worst, tuple(A[i].tolist()) if worst > 0 else (), len(A))


def disjointify(f0: DyadicStep, f1: DyadicStep) -> tuple[DyadicStep, DyadicStep]:
    """Zero each function wherever its modulus does not strictly dominate the other.

    Ties zero both outputs.  The results are disjointly supported and each
    differs from its input by at most || |f0| ^ |f1| ||_p in every p-norm.
    """
    a, b = common_level(f0, f1)
    ma, mb = np.abs(a.values), np.abs(b.values)
    g0 = np.where(ma <= mb, 0, a.values)
    g1 = np.where(mb <= ma, 0, b.values)
    return DyadicStep(a.level, g0, a.field), DyadicStep(a.level, g1, a.field)
