"""Symmetric r-stable variates, empirical characteristic functions and moments.

Real variates come from the Chambers-Mallows-Stuck transform; complex
isotropic variates are sub-Gaussian mixtures sqrt(A) * (G1 + i G2) with A a
positive (r/2)-stable subordinator.  Both are normalised so that the
characteristic function is exp(-scale**r * |t|**r).

Every draw is keyed by ``(seed, stream_id)`` through a counter-based Philox
generator, so streams are reproducible and independent of evaluation order.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from lpembed.spaces import Field

MOM_BLOCKS = 32


class DivergentMomentWarning(RuntimeWarning):
    """Raised (as a warning) when an Lp moment of the law is infinite."""


@dataclass(frozen=True)
class StableSpec:
    r: float
    scale: float = 1.0
    field: Field = Field.REAL

    def __post_init__(self):
        if not 0 < self.r <= 2:
            raise ValueError(f"stability index r must lie in (0, 2], got {self.r}")
        if self.scale < 0:
            raise ValueError(f"scale must be nonnegative, got {self.scale}")
        object.__setattr__(self, "field", Field(self.field))

    def theoretical_cf(self, t) -> np.ndarray:
        """exp(-scale**r |t|**r); ``t`` may be complex for the complex field."""
        return np.exp(-(self.scale ** self.r) * np.abs(t) ** self.r)


@dataclass(frozen=True, eq=False)
class SampleVector:
    """N draws of a random variable on [0, 1], viewed as an element of Lp.

    Linear combinations of sample vectors are pointwise and drop the
    generating ``spec`` (the result is no longer a single stable draw).
    """

    samples: np.ndarray
    spec: StableSpec | None = None
    seed: int | None = None
    stream_id: int | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("samples must be a nonempty 1-d array")
        arr = arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64, copy=False)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def field(self) -> Field:
        return Field.COMPLEX if np.iscomplexobj(self.samples) else Field.REAL

    def _combine(self, other, op):
        if not isinstance(other, SampleVector):
            return NotImplemented
        if other.n_samples != self.n_samples:
            raise ValueError("sample vectors have different lengths")
        return SampleVector(op(self.samples, other.samples))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        if isinstance(scalar, SampleVector):
            return NotImplemented
        return SampleVector(scalar * self.samples)

    __rmul__ = __mul__

    def __neg__(self):
        return SampleVector(-self.samples)

    def header(self) -> dict[str, Any]:
        spec = self.spec
        return {
            "r": None if spec is None else spec.r,
            "scale": None if spec is None else spec.scale,
            "field": self.field.value,
            "N": self.n_samples,
            "seed": self.seed,
            "stream_id": self.stream_id,
            "meta": self.meta,
        }

    def save(self, path) -> None:
        """Write a JSON header line followed by raw little-endian float64 data.

        Complex vectors are stored as interleaved (re, im) pairs.
        """
        path = Path(path)
        data = self.samples
        if self.field is Field.COMPLEX:
            data = np.column_stack([data.real, data.imag]).ravel()
        with path.open("wb") as fh:
            fh.write(json.dumps(self.header(), sort_keys=True).encode() + b"\n")
            fh.write(np.asarray(data, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "SampleVector":
        with Path(path).open("rb") as fh:
            header = json.loads(fh.readline())
            data = np.frombuffer(fh.read(), dtype="<f8").astype(np.float64)
        if header["field"] == Field.COMPLEX.value:
            data = data[0::2] + 1j * data[1::2]
        spec = None
        if header["r"] is not None:
            spec = StableSpec(header["r"], header["scale"], Field(header["field"]))
        return cls(data, spec, header["seed"], header["stream_id"], header.get("meta") or {})

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            if self.field is Field.COMPLEX:
                writer.writerow(["index", "re", "im"])
                for i, z in enumerate(self.samples):
                    writer.writerow([i, repr(z.real), repr(z.imag)])
            else:
                writer.writerow(["index", "value"])
                for i, x in enumerate(self.samples):
                    writer.writerow([i, repr(float(x))])


def stream_generator(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Counter-based generator for one (seed, stream) pair."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,))
    return np.random.Generator(np.random.Philox(ss))


def _unit_real_stable(r: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if r == 2:
        return math.sqrt(2.0) * rng.standard_normal(n)
    u = rng.uniform(-np.pi / 2, np.pi / 2, n)
    if r == 1:
        return np.tan(u)
    w = rng.standard_exponential(n)
    return (np.sin(r * u) / np.cos(u) ** (1.0 / r)) * (np.cos((1.0 - r) * u) / w) ** ((1.0 - r) / r)


def _positive_stable(a: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Positive a-stable draws (0 < a < 1) with Laplace transform exp(-s**a)."""
    u = rng.uniform(0.0, np.pi, n)
    w = rng.standard_exponential(n)
    return (np.sin(a * u) / np.sin(u) ** (1.0 / a)) * (np.sin((1.0 - a) * u) / w) ** ((1.0 - a) / a)


def _unit_complex_stable(r: float, n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((2, n))
    if r == 2:
        mix = np.full(n, 2.0)
    else:
        mix = 2.0 * _positive_stable(r / 2.0, n, rng)
    # E exp(i Re(conj(z) Z)) = E exp(-mix |z|^2 / 2) = exp(-|z|^r)
    return np.sqrt(mix) * (g[0] + 1j * g[1])


def sample_symmetric_stable(spec: StableSpec, n: int, seed: int, stream_id: int = 0) -> SampleVector:
    """Real symmetric r-stable draws with characteristic function exp(-scale^r |t|^r)."""
    if n < 1:
        raise ValueError("need at least one sample")
    if spec.field is not Field.REAL:
        raise ValueError("use sample_isotropic_complex_stable for the complex field")
    rng = stream_generator(seed, stream_id)
    unit = _unit_real_stable(spec.r, n, rng)
    samples = np.zeros(n) if spec.scale == 0 else spec.scale * unit
    return SampleVector(samples, spec, seed, stream_id)


def sample_isotropic_complex_stable(spec: StableSpec, n: int, seed: int, stream_id: int = 0) -> SampleVector:
    """Rotation-invariant complex r-stable draws, CF exp(-c |z|^r).

    The construction targets ``c = scale**r``; the constant measured from the
    empirical CF at |z| = 1 is recorded as ``meta["c_measured"]``.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    spec = StableSpec(spec.r, spec.scale, Field.COMPLEX)
    rng = stream_generator(seed, stream_id)
    unit = _unit_complex_stable(spec.r, n, rng)
    samples = np.zeros(n, dtype=np.complex128) if spec.scale == 0 else spec.scale * unit
    cf_at_one = float(np.mean(np.cos(samples.real)))
    meta = {
        "c_target": spec.scale ** spec.r,
        "c_measured": -math.log(cf_at_one) if cf_at_one > 0 else math.inf,
        "c_reference_point": 1.0,
    }
    return SampleVector(samples, spec, seed, stream_id, meta)


def sample(spec: StableSpec, n: int, seed: int, stream_id: int = 0) -> SampleVector:
    if spec.field is Field.COMPLEX:
        return sample_isotropic_complex_stable(spec, n, seed, stream_id)
    return sample_symmetric_stable(spec, n, seed, stream_id)


def empirical_cf(sv: SampleVector, t) -> float:
    """Empirical characteristic function at ``t`` (a complex ``t`` for complex samples).

    Symmetric laws have real CFs, so only the cosine part is averaged.
    """
    x = sv.samples
    if sv.field is Field.COMPLEX:
        t = complex(t)
        if t == 0:
            return 1.0
        phase = t.real * x.real + t.imag * x.imag
    else:
        t = float(t)
        if t == 0:
            return 1.0
        phase = t * x
    return float(np.mean(np.cos(phase)))


def median_of_means(values: np.ndarray, blocks: int = MOM_BLOCKS) -> float:
    values = np.asarray(values, dtype=np.float64)
    blocks = max(1, min(blocks, values.size))
    return float(np.median([chunk.mean() for chunk in np.array_split(values, blocks)]))


def empirical_lp_norm(sv: SampleVector | np.ndarray, p: float, blocks: int = MOM_BLOCKS) -> float:
    """Monte Carlo ||g||_p using a median of block means of |x|^p."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    x = sv.samples if isinstance(sv, SampleVector) else np.asarray(sv)
    spec = sv.spec if isinstance(sv, SampleVector) else None
    if spec is not None and spec.r < 2 and p >= spec.r and spec.scale > 0:
        warnings.warn(
            f"E|g|^p is infinite for p={p} >= r={spec.r}; the estimate grows with N",
            DivergentMomentWarning,
            stacklevel=2,
        )
    return median_of_means(np.abs(x) ** p, blocks) ** (1.0 / p)


def independent_family(spec: StableSpec, count: int, n: int, seed: int) -> list[SampleVector]:
    """``count`` independent copies drawn from streams 0..count-1 of one seed."""
    if count < 1:
        raise ValueError("family size must be at least 1")
    return [sample(spec, n, seed, stream_id=j) for j in range(count)]


CF_T_GRID = (-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0)


def cf_grid_errors(sv: SampleVector, spec: StableSpec, grid=CF_T_GRID) -> list[tuple[float, float, float]]:
    """(t, empirical CF, theoretical CF) along ``grid``; complex samples use real t."""
    return [(float(t), empirical_cf(sv, t), float(spec.theoretical_cf(t))) for t in grid]
