"""Finite-dimensional Banach-lattice interpretations.

The carrier is the closed unit ball of R^k with the pointwise order and a
lattice norm; the metric is d(x, y) = ||x - y|| / 2, so the ball has
diameter 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from lpembed.logic.language import L_BANACH, L_BLATTICE, L_LPC, Language
from lpembed.spaces import DyadicStep


class LatticeModel:
    """R^k with pointwise order and a lattice norm.

    Either give ``p`` (and optional cell ``weights`` for a weighted p-norm,
    which is a genuine Lp of a finite measure) or an arbitrary ``norm``.
    """

    def __init__(
        self,
        dim: int,
        p: float | None = None,
        weights: np.ndarray | None = None,
        norm: Callable[[np.ndarray], float] | None = None,
        name: str = "",
    ):
        if (p is None) == (norm is None):
            raise ValueError("give exactly one of p or norm")
        self.dim = int(dim)
        self.p = p
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        self._norm = norm
        self.name = name or (f"l^{p}_{dim}" if p is not None else f"custom_{dim}")

    @classmethod
    def lp(cls, dim: int, p: float) -> "LatticeModel":
        return cls(dim, p=p, name=f"l^{p}_{dim}")

    @classmethod
    def dyadic(cls, level: int, p: float) -> "LatticeModel":
        """Step functions of the given level inside Lp[0, 1]."""
        k = 2 ** level
        return cls(k, p=p, weights=np.full(k, 1.0 / k), name=f"L^{p}[0,1] level {level}")

    @classmethod
    def samples(cls, n: int, p: float, norm: Callable[[np.ndarray], float]) -> "LatticeModel":
        """Monte Carlo model: vectors are sample columns, norm is an estimator."""
        return cls(n, norm=norm, name=f"samples(N={n}, p={p})")

    def norm(self, x: np.ndarray) -> float:
        if self._norm is not None:
            return float(self._norm(x))
        a = np.abs(x) ** self.p
        mass = a.sum() if self.weights is None else a @ self.weights
        return float(mass ** (1.0 / self.p))

    def norms(self, xs: np.ndarray) -> np.ndarray:
        """Row-wise norms of a 2-d array."""
        if self._norm is not None:
            return np.array([self._norm(x) for x in xs])
        a = np.abs(xs) ** self.p
        mass = a.sum(axis=1) if self.weights is None else a @ self.weights
        return mass ** (1.0 / self.p)

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim)

    @property
    def vectorized(self) -> bool:
        return self._norm is None


@dataclass(eq=False)
class Interpretation:
    """A lattice model plus constant assignments (and optionally a complex norm).

    ``norm_plus(u, v)`` interprets the binary predicate ||u + i v|| on the
    complexification.  Names ``c_<bits>`` absent from ``constants`` resolve to
    ``default_constant`` when that is set.
    """

    model: LatticeModel
    constants: Mapping[str, np.ndarray] = field(default_factory=dict)
    norm_plus: Callable[[np.ndarray, np.ndarray], float] | None = None
    lattice: bool = True
    default_constant: Callable[[str], np.ndarray | None] | None = None
    ball_tol: float = 1e-9
    _norm_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.constants = {k: np.asarray(v, dtype=float) for k, v in self.constants.items()}
        for name, v in self.constants.items():
            if v.shape != (self.model.dim,):
                raise ValueError(f"constant {name} has shape {v.shape}, model dimension is {self.model.dim}")
            nrm = self.model.norm(v)
            if nrm > 1 + self.ball_tol:
                raise ValueError(f"constant {name} has norm {nrm} > 1 (outside the unit ball)")

    @property
    def language(self) -> Language:
        base = L_BLATTICE if self.lattice else L_BANACH
        if self.norm_plus is not None:
            base = L_LPC
        return base.with_constants(sorted(self.constants))

    def constant(self, name: str) -> np.ndarray:
        if name in self.constants:
            return self.constants[name]
        if self.default_constant is not None:
            v = self.default_constant(name)
            if v is not None:
                return v
        raise KeyError(f"constant symbol {name!r} is not interpreted")

    def distance(self, x: np.ndarray, y: np.ndarray) -> float:
        return 0.5 * self.model.norm(x - y)


def dyadic_vector(f: DyadicStep, level: int) -> np.ndarray:
    return np.asarray(f.refine(level).values, dtype=float)


def complex_lp_norm_plus(model: LatticeModel) -> Callable[[np.ndarray, np.ndarray], float]:
    """||u + i v|| as the p-norm of the pointwise modulus sqrt(u^2 + v^2)."""
    if model.p is None:
        raise ValueError("model has no p")

    def norm_plus(u, v):
        return model.norm(np.hypot(u, v))

    return norm_plus
