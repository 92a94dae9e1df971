"""Truth values of formulas in an :class:`Interpretation`.

Quantifier-free formulas are evaluated directly.  ``sup``/``inf`` over the
unit ball are approximated by a deterministic scrambled Sobol sample of the
ball followed by a compass (pattern) search from the best points.  A sampled
sup is a lower bound for the true sup and a sampled inf an upper bound; the
other side of the bracket adds ``L * rho`` where ``L`` is a Lipschitz
constant of the body derived from the symbol moduli and ``rho`` is the
covering radius of the sample set, estimated from an independent probe set.
When the probe estimate is unavailable (non-vectorized norms) that side of
the bracket is the trivial bound 0 or 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from lpembed.logic import syntax as ast
from lpembed.logic.models import Interpretation

SOBOL_MAX_DIM = 1024


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class QuantifierBudget:
    samples: int = 128
    refine_iters: int = 24
    top_k: int = 3
    probes: int = 256
    safety: float = 2.0
    max_refine_dim: int = 64
    seed: int = 0


@dataclass(frozen=True)
class TruthValue:
    value: float
    lower: float
    upper: float

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def to_dict(self) -> dict:
        return {"value": self.value, "lower": self.lower, "upper": self.upper}


def _clip(x: float) -> float:
    return min(1.0, max(0.0, x))


# -- Lipschitz constants (w.r.t. the norm distance of one variable) ----------


def term_lipschitz(t, var: str) -> float:
    if isinstance(t, ast.Var):
        return 1.0 if t.name == var else 0.0
    if isinstance(t, (ast.Zero, ast.Const)):
        return 0.0
    if isinstance(t, (ast.Oplus, ast.Meet)):
        return abs(float(t.s)) * term_lipschitz(t.left, var) + abs(float(t.t)) * term_lipschitz(t.right, var)
    if isinstance(t, ast.Abs):
        return term_lipschitz(t.arg, var)
    raise TypeError(t)


def lipschitz(f, var: str) -> float:
    if isinstance(f, ast.Lit):
        return 0.0
    if isinstance(f, ast.Norm):
        return term_lipschitz(f.a, var)
    if isinstance(f, ast.Dist):
        return 0.5 * (term_lipschitz(f.a, var) + term_lipschitz(f.b, var))
    if isinstance(f, ast.NormPlus):
        return term_lipschitz(f.a, var) + term_lipschitz(f.b, var)
    if isinstance(f, (ast.Add, ast.Sub)):
        return lipschitz(f.a, var) + lipschitz(f.b, var)
    if isinstance(f, ast.Scale):
        return abs(float(f.k)) * lipschitz(f.a, var)
    if isinstance(f, ast.Pow):
        k = float(f.k)
        inner = lipschitz(f.a, var)
        if inner == 0:
            return 0.0
        return k * inner if k >= 1 else math.inf
    if isinstance(f, ast.Conn):
        ls = [lipschitz(a, var) for a in f.args]
        return max(ls) if f.name in ("max", "min") else sum(ls)
    if isinstance(f, ast.Quant):
        return 0.0 if f.var == var else lipschitz(f.body, var)
    raise TypeError(f)


# -- terms -----------------------------------------------------------------


def eval_term(t, interp: Interpretation, env: dict[str, np.ndarray]) -> np.ndarray:
    if isinstance(t, ast.Zero):
        return interp.model.zero()
    if isinstance(t, ast.Const):
        try:
            return interp.constant(t.name)
        except KeyError as exc:
            raise EvaluationError(str(exc)) from None
    if isinstance(t, ast.Var):
        if t.name not in env:
            raise EvaluationError(f"unbound variable {t.name!r}")
        return env[t.name]
    if isinstance(t, ast.Oplus):
        s, u = float(t.s), float(t.t)
        out = s * eval_term(t.left, interp, env)
        if u != 0:
            out = out + u * eval_term(t.right, interp, env)
        return out
    if isinstance(t, ast.Meet):
        if not interp.lattice:
            raise EvaluationError("meet is not in the interpretation's language")
        return np.minimum(float(t.s) * eval_term(t.left, interp, env), float(t.t) * eval_term(t.right, interp, env))
    if isinstance(t, ast.Abs):
        if not interp.lattice:
            raise EvaluationError("abs is not in the interpretation's language")
        return np.abs(eval_term(t.arg, interp, env))
    raise TypeError(f"not a term: {t!r}")


def _term_norm(t, interp: Interpretation, env) -> float:
    if not ast.free_variables(t):
        cache = interp._norm_cache
        if t not in cache:
            cache[t] = interp.model.norm(eval_term(t, interp, env))
        return cache[t]
    return interp.model.norm(eval_term(t, interp, env))


# -- formulas --------------------------------------------------------------

Interval = tuple[float, float, float]  # (value, lower, upper)


def _point(x: float) -> Interval:
    return (x, x, x)


def _absdiff(a: Interval, b: Interval) -> Interval:
    v = abs(a[0] - b[0])
    lo, hi = a[1] - b[2], a[2] - b[1]
    if lo <= 0 <= hi:
        return (v, 0.0, max(-lo, hi))
    return (v, min(abs(lo), abs(hi)), max(abs(lo), abs(hi)))


def _monus(a: Interval, b: Interval) -> Interval:
    return (max(a[0] - b[0], 0.0), max(a[1] - b[2], 0.0), max(a[2] - b[1], 0.0))


def _eval(f, interp: Interpretation, env, budget: QuantifierBudget) -> Interval:
    if isinstance(f, ast.Lit):
        return _point(float(f.value))
    if isinstance(f, ast.Norm):
        return _point(_term_norm(f.a, interp, env))
    if isinstance(f, ast.Dist):
        return _point(0.5 * interp.model.norm(eval_term(f.a, interp, env) - eval_term(f.b, interp, env)))
    if isinstance(f, ast.NormPlus):
        if interp.norm_plus is None:
            raise EvaluationError("normplus is not in the interpretation's language")
        return _point(float(interp.norm_plus(eval_term(f.a, interp, env), eval_term(f.b, interp, env))))
    if isinstance(f, ast.Add):
        a, b = _eval(f.a, interp, env, budget), _eval(f.b, interp, env, budget)
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2])
    if isinstance(f, ast.Sub):
        a, b = _eval(f.a, interp, env, budget), _eval(f.b, interp, env, budget)
        return (a[0] - b[0], a[1] - b[2], a[2] - b[1])
    if isinstance(f, ast.Scale):
        k = float(f.k)
        a = _eval(f.a, interp, env, budget)
        lo, hi = sorted((k * a[1], k * a[2]))
        return (k * a[0], lo, hi)
    if isinstance(f, ast.Pow):
        k = float(f.k)
        a = _eval(f.a, interp, env, budget)
        return tuple(_clip(x) ** k for x in a)
    if isinstance(f, ast.Conn):
        args = [_eval(a, interp, env, budget) for a in f.args]
        if f.name == "max":
            return tuple(max(a[i] for a in args) for i in range(3))
        if f.name == "min":
            return tuple(min(a[i] for a in args) for i in range(3))
        if f.name == "absdiff":
            return _absdiff(*args)
        # leq(s, t) = |t - max(s, t)| coincides with the truncated difference s -. t
        return _monus(*args)
    if isinstance(f, ast.Quant):
        return _eval_quantifier(f, interp, env, budget)
    raise TypeError(f"not a formula: {f!r}")


def _ball_points(u: np.ndarray, interp: Interpretation) -> np.ndarray:
    """Radial map of the cube [-1, 1]^k onto the unit ball (sup-norm radius kept)."""
    x = 2.0 * u - 1.0
    radius = np.max(np.abs(x), axis=1)
    nrm = interp.model.norms(x)
    scale = np.divide(radius, nrm, out=np.zeros_like(radius), where=nrm > 0)
    return x * scale[:, None]


def _project(x: np.ndarray, interp: Interpretation) -> np.ndarray:
    n = interp.model.norm(x)
    return x / n if n > 1 else x


def _uniform(n: int, dim: int, seed: int) -> np.ndarray:
    if dim <= SOBOL_MAX_DIM:
        m = max(1, math.ceil(math.log2(max(n, 2))))
        return qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)[:n]
    return np.random.default_rng(seed).random((n, dim))


def _eval_quantifier(f: ast.Quant, interp: Interpretation, env, budget: QuantifierBudget) -> Interval:
    kind = f.kind
    names = [f.var]
    body = f.body
    while isinstance(body, ast.Quant) and body.kind == kind:
        names.append(body.var)
        body = body.body
    k = interp.model.dim
    nv = len(names)
    sign = 1.0 if kind == "sup" else -1.0

    def score(points: list[np.ndarray]) -> Interval:
        inner = dict(env)
        inner.update(zip(names, points))
        v, lo, hi = _eval(body, interp, inner, budget)
        return (_clip(v), _clip(lo), _clip(hi))

    cube = _uniform(budget.samples, k * nv, budget.seed)
    blocks = [_ball_points(cube[:, j * k:(j + 1) * k], interp) for j in range(nv)]
    candidates = [[blocks[j][i] for j in range(nv)] for i in range(len(cube))]
    # structured points: the origin and normalized signed coordinate vectors
    candidates.append([interp.model.zero() for _ in range(nv)])
    if k <= 64:
        for i in range(k):
            for sgn in (1.0, -1.0):
                e = np.zeros(k)
                e[i] = sgn
                e = e / interp.model.norm(e)
                candidates.append([e.copy() for _ in range(nv)])

    scored = [(score(c), c) for c in candidates]
    scored.sort(key=lambda item: -sign * item[0][0])

    best_v = scored[0][0][0]
    best_in = scored[0][0]
    if k * nv <= budget.max_refine_dim:
        for (_, start) in scored[: budget.top_k]:
            point, val = _pattern_search(start, score, sign, interp, budget)
            if sign * val[0] > sign * best_v:
                best_v, best_in = val[0], val

    # bracket: certified side from samples; other side from Lipschitz * covering radius
    if kind == "sup":
        lower = max(best_in[1], max(s[0][1] for s in scored))
        upper = max(max(s[0][2] for s in scored), best_in[2])
    else:
        upper = min(best_in[2], min(s[0][2] for s in scored))
        lower = min(min(s[0][1] for s in scored), best_in[1])
    rho = _covering_radius(blocks, body, names, interp, budget)
    if rho is None:
        if kind == "sup":
            upper = 1.0
        else:
            lower = 0.0
    elif kind == "sup":
        upper = _clip(upper + budget.safety * rho)
    else:
        lower = _clip(lower - budget.safety * rho)
    return (best_v, min(lower, best_v), max(upper, best_v))


def _pattern_search(start, score, sign, interp, budget):
    point = [x.copy() for x in start]
    val = score(point)
    step = 0.5
    for _ in range(budget.refine_iters):
        improved = False
        for j in range(len(point)):
            for i in range(point[j].size):
                for d in (step, -step):
                    trial = [x.copy() for x in point]
                    trial[j][i] += d
                    trial[j] = _project(trial[j], interp)
                    tv = score(trial)
                    if sign * tv[0] > sign * val[0]:
                        point, val, improved = trial, tv, True
        if not improved:
            step /= 2
            if step < 1e-6:
                break
    return point, val


def _covering_radius(blocks, body, names, interp, budget):
    """Max over probe points of the Lipschitz-weighted distance to the nearest sample."""
    if not interp.model.vectorized:
        return None
    ls = [lipschitz(body, name) for name in names]
    if any(math.isinf(L) for L in ls):
        return None
    if all(L == 0 for L in ls):
        return 0.0
    k = interp.model.dim
    probe_cube = _uniform(budget.probes, k * len(names), budget.seed + 7919)
    probes = [_ball_points(probe_cube[:, j * k:(j + 1) * k], interp) for j in range(len(names))]
    total = np.zeros((budget.probes, blocks[0].shape[0]))
    for L, P, S in zip(ls, probes, blocks):
        if L == 0:
            continue
        diff = P[:, None, :] - S[None, :, :]
        d = interp.model.norms(diff.reshape(-1, k)).reshape(diff.shape[:2])
        total += L * d
    return float(total.min(axis=1).max())


def evaluate(
    f,
    interp: Interpretation,
    budget: QuantifierBudget | None = None,
    env: dict[str, np.ndarray] | None = None,
) -> TruthValue:
    """Truth value of ``f`` in ``interp``, clipped into [0, 1], with its bracket."""
    budget = budget or QuantifierBudget()
    env = {k: np.asarray(v, dtype=float) for k, v in (env or {}).items()}
    missing = ast.free_variables(f) - set(env)
    if missing:
        raise EvaluationError(f"unbound variable(s): {sorted(missing)}")
    lang = interp.language
    for name in ast.symbols_used(f):
        if name in ("oplus", "meet", "abs", "normplus", "norm", "d", "0") and name not in lang:
            raise EvaluationError(f"symbol {name!r} is not in {lang.name}")
    v, lo, hi = _eval(f, interp, env, budget)
    return TruthValue(_clip(v), _clip(lo), _clip(hi))
