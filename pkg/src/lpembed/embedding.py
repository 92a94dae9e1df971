"""Isometric embedding of l^r into Lp[0, 1] from independent stable families.

Basis vector j is the j-th stream of a symmetric r-stable family divided by
its own empirical p-norm, so each basis vector has empirical norm exactly 1
and all Monte Carlo error sits in the cross terms.
"""

from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from lpembed.disintegration import Disintegration, FiniteTree
from lpembed.spaces import DyadicStep, Field
from lpembed.stable import (
    DivergentMomentWarning,
    SampleVector,
    StableSpec,
    empirical_lp_norm,
    independent_family,
)


def check_exponents(r: float, p: float) -> None:
    """Admissible region 1 <= p <= r <= 2 with finite p-th moments."""
    if not (1 <= p <= r <= 2):
        raise ValueError(f"need 1 <= p <= r <= 2, got r={r}, p={p}")
    if p == r < 2:
        warnings.warn(
            f"p = r = {r} < 2: the stable p-th moment is infinite, norms will not settle",
            DivergentMomentWarning,
            stacklevel=3,
        )


@dataclass(frozen=True, eq=False)
class EmbeddedBasis:
    r: float
    p: float
    basis: list[SampleVector]
    norms_used: list[float]
    field: Field = Field.REAL
    seed: int = 0

    @property
    def m(self) -> int:
        return len(self.basis)

    @property
    def n_samples(self) -> int:
        return self.basis[0].n_samples

    def norm(self, v) -> float:
        """The Monte Carlo p-norm used throughout this basis."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DivergentMomentWarning)
            return empirical_lp_norm(v, self.p)


def build_embedding(
    r: float, p: float, m: int, n: int = 10**6, seed: int = 0, field: Field = Field.REAL
) -> EmbeddedBasis:
    check_exponents(r, p)
    if m < 1:
        raise ValueError("need at least one basis vector")
    field = Field(field)
    family = independent_family(StableSpec(r, 1.0, field), m, n, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergentMomentWarning)
        norms = [empirical_lp_norm(g, p) for g in family]
    basis = [
        SampleVector(g.samples / nrm, g.spec, g.seed, g.stream_id, {**g.meta, "raw_norm": nrm})
        for g, nrm in zip(family, norms)
    ]
    return EmbeddedBasis(r, p, basis, norms, field, seed)


def embed(basis: EmbeddedBasis, a: Sequence) -> SampleVector:
    """Pointwise sum_j a_j f_j."""
    a = np.asarray(a)
    if a.shape != (basis.m,):
        raise ValueError(f"expected {basis.m} coefficients, got shape {a.shape}")
    if np.iscomplexobj(a) and np.any(a.imag) and basis.field is Field.REAL:
        raise ValueError("complex coefficients for a real embedding")
    dtype = np.complex128 if basis.field is Field.COMPLEX else np.float64
    out = np.zeros(basis.n_samples, dtype=dtype)
    for aj, f in zip(a, basis.basis):
        if aj != 0:
            out += aj * f.samples
    return SampleVector(out, meta={"coefficients": [str(x) for x in a]})


def lr_norm(a: Sequence, r: float) -> float:
    return float(np.sum(np.abs(np.asarray(a)) ** r) ** (1.0 / r))


def default_tolerance(r: float, n: int) -> float:
    """Heuristic relative tolerance from the stable CLT rate N**-(1 - 1/r), floored at 1%."""
    rate = n ** -(1.0 - 1.0 / r) if r > 1 else 1.0
    return max(0.01, min(1.0, 5.0 * rate))


@dataclass
class IsometryTrial:
    coefficients: list
    target: float
    empirical: float
    rel_error: float


@dataclass
class IsometryReport:
    config: dict
    trials: list[IsometryTrial] = field(default_factory=list)
    tol: float = 0.05

    @property
    def max_error(self) -> float:
        return max((t.rel_error for t in self.trials), default=0.0)

    @property
    def mean_error(self) -> float:
        return float(np.mean([t.rel_error for t in self.trials])) if self.trials else 0.0

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "tol": self.tol,
            "max_error": self.max_error,
            "mean_error": self.mean_error,
            "passed": self.passed,
            "trials": [asdict(t) for t in self.trials],
        }

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "lr_norm", "empirical_lp_norm", "rel_error"])
            for i, t in enumerate(self.trials):
                writer.writerow([i, repr(t.target), repr(t.empirical), repr(t.rel_error)])


def _coefficient_text(a: np.ndarray) -> list:
    if np.iscomplexobj(a):
        return [[float(z.real), float(z.imag)] for z in a]
    return [float(x) for x in a]


def adversarial_coefficients(m: int) -> list[np.ndarray]:
    eye = np.eye(m)
    return [eye[j] for j in range(m)] + [np.ones(m), np.array([(-1.0) ** j for j in range(m)])]


def verify_isometry(
    basis: EmbeddedBasis,
    trials: int = 20,
    tol: float | None = None,
    seed: int = 0,
    include_adversarial: bool = True,
    coefficients: Sequence[Sequence] | None = None,
) -> IsometryReport:
    """Compare the empirical ||sum a_j f_j||_p with ||a||_r.

    Random coefficients are uniform on [-1, 1]^m (real and imaginary parts
    independently for the complex field); the unit vectors, the all-ones
    vector and alternating signs are checked first unless disabled.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if tol is None:
        tol = default_tolerance(basis.r, basis.n_samples)
    rng = np.random.default_rng(seed)
    coeffs: list[np.ndarray] = []
    if coefficients is not None:
        coeffs.extend(np.asarray(a) for a in coefficients)
    elif include_adversarial:
        coeffs.extend(adversarial_coefficients(basis.m))
    if coefficients is None:
        for _ in range(trials):
            a = rng.uniform(-1, 1, basis.m)
            if basis.field is Field.COMPLEX:
                a = a + 1j * rng.uniform(-1, 1, basis.m)
            coeffs.append(a)
    report = IsometryReport(
        config={
            "r": basis.r,
            "p": basis.p,
            "m": basis.m,
            "N": basis.n_samples,
            "field": basis.field.value,
            "embedding_seed": basis.seed,
            "trial_seed": seed,
            "trials": len(coeffs),
        },
        tol=tol,
    )
    for a in coeffs:
        target = lr_norm(a, basis.r)
        emp = basis.norm(embed(basis, a))
        rel = abs(emp - target) / target if target > 0 else abs(emp)
        report.trials.append(IsometryTrial(_coefficient_text(a), target, emp, rel))
    return report


def binary_tree(depth: int) -> FiniteTree:
    if depth < 0:
        raise ValueError("depth must be >= 0")
    nodes = [()]
    for k in range(1, depth + 1):
        nodes.extend(itertools.product((0, 1), repeat=k))
    return FiniteTree(nodes)


def dyadic_interval(sigma: Sequence[int]) -> tuple[float, float]:
    """J_sigma: halve [0, 1] left (0) or right (1) once per entry of sigma."""
    lo, width = 0.0, 1.0
    for bit in sigma:
        width /= 2
        lo += bit * width
    return lo, lo + width


def dyadic_disintegration(r: float, depth: int) -> Disintegration:
    """sigma -> indicator of J_sigma on the full binary tree, in L^r."""
    tree = binary_tree(depth)
    assign = {
        node: DyadicStep.indicator(*dyadic_interval(node), level=depth)
        for node in tree
    }
    return Disintegration(tree, assign, r)


def leaf_index(sigma: Sequence[int]) -> int:
    """Integer whose base-2 digits (most significant first) are sigma."""
    n = len(sigma)
    return sum(bit << (n - 1 - j) for j, bit in enumerate(sigma))
