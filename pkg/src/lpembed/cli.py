"""Command line entry point: ``lpembed <command> [flags]``.

Every command writes ``report.json`` (resolved config, results, pass flag;
the wall-clock timestamp lives under ``metadata`` only) plus one CSV series
into ``--out``.  A JSON file given with ``--config`` overrides the flags.

Exit status: 0 pass, 1 fail, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import sys
import warnings
from pathlib import Path
from typing import Any, Callable

import numpy as np

from lpembed import __version__
from lpembed.complexify import (
    ComplexModel,
    ComplexPair,
    check_abstract_complex_lp,
    complex_condition_residual,
    failed_conditions,
    modulus_theta_grid,
    theta_grid_bound,
)
from lpembed.disintegration import Disintegration, LiftError, TreeIso, lift_isomorphism
from lpembed.embedding import build_embedding, check_exponents, dyadic_disintegration, verify_isometry
from lpembed.spaces import DyadicStep, lp_norm
from lpembed.stable import DivergentMomentWarning, StableSpec, cf_grid_errors, sample

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _positive_int(name: str, value) -> int:
    if int(value) != value or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value}")
    return int(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# Commands ----------------------------------------------------------------
# Each takes the resolved config and the output directory and returns
# (passed, results).


def cmd_stable_verify(cfg: dict, out: Path) -> tuple[bool, dict]:
    spec = StableSpec(cfg["r"], cfg["sigma"], cfg["field"])
    n = _positive_int("N", cfg["N"])
    sv = sample(spec, n, cfg["seed"])
    rows = [(t, emp, theo, abs(emp - theo)) for t, emp, theo in cf_grid_errors(sv, spec)]
    _write_csv(out / "cf_grid.csv", ["t", "empirical_cf", "theoretical_cf", "abs_error"], rows)
    max_err = max(row[3] for row in rows)
    return max_err <= cfg["tol"], {"max_cf_error": max_err, "tol": cfg["tol"], "meta": sv.meta}


def cmd_verify_embedding(cfg: dict, out: Path) -> tuple[bool, dict]:
    check_exponents(cfg["r"], cfg["p"])
    basis = build_embedding(
        cfg["r"], cfg["p"], _positive_int("m", cfg["m"]), _positive_int("N", cfg["N"]), cfg["seed"], cfg["field"]
    )
    report = verify_isometry(basis, trials=_positive_int("trials", cfg["trials"]), tol=cfg["tol"], seed=cfg["seed"])
    report.write_csv(out / "isometry.csv")
    return report.passed, report.to_dict()


def cmd_check_tn(cfg: dict, out: Path) -> tuple[bool, dict]:
    from lpembed.logic.theories import build_Tn_model, check_theory, lp_axiom_grid, phi_grid, psi_grid, theory_T_n

    n, r, p = cfg["n"], cfg["r"], cfg["p"]
    if int(n) != n or n < 0:
        raise ConfigError(f"n must be a nonnegative integer, got {n}")
    n = int(n)
    if cfg["mode"] == "mc":
        check_exponents(r, p)
    den = _positive_int("max_den", cfg["max_den"])
    if cfg["mode"] == "exact":
        if p != r:
            raise ConfigError("exact mode needs p == r")
        interp = build_Tn_model(n, r, p)
        lattice = True
        family_tol = {}
    else:
        basis = build_embedding(r, p, 2 ** n, _positive_int("N", cfg["N"]), cfg["seed"])
        interp = build_Tn_model(n, r, p, basis)
        lattice = cfg["lattice_axioms"]
        family_tol = {"Psi": cfg["psi_tol"]}
    sentences = theory_T_n(
        n, r, p, phi_grid(den), psi_grid(den), lp_axiom_grid(2), include_lattice_axioms=lattice
    )
    report = check_theory(interp, sentences, tol=cfg["tol"], family_tol=family_tol)
    _write_csv(
        out / "sentences.csv",
        ["sentence", "family", "value", "lower", "upper", "pass"],
        [(s.name, s.family, s.value, s.lower, s.upper, int(s.passed)) for s in report.results],
    )
    results = report.to_dict()
    results.pop("sentences")
    results["count"] = len(report.results)
    results["failing"] = [s.name for s in report.results if not s.passed]
    return report.passed, results


def _bit_flip(d0: Disintegration) -> TreeIso:
    """Swap the two depth-1 subtrees."""
    return TreeIso({node: ((1 - node[0],) + node[1:] if node else node) for node in d0.tree})


def cmd_lift_demo(cfg: dict, out: Path) -> tuple[bool, dict]:
    r, depth = cfg["r"], cfg["depth"]
    if not 1 <= r <= 2:
        raise ConfigError(f"need 1 <= r <= 2, got {r}")
    if int(depth) != depth or depth < 0:
        raise ConfigError(f"depth must be a nonnegative integer, got {depth}")
    d0 = dyadic_disintegration(r, int(depth))
    d1 = dyadic_disintegration(r, int(depth))
    f = _bit_flip(d0) if depth >= 1 else TreeIso.identity(d0.tree)
    try:
        T = lift_isomorphism(d0, d1, f)
    except LiftError as exc:
        return False, {"error": str(exc)}
    rng = np.random.default_rng(cfg["seed"])
    nodes = list(d0.tree)
    rows, worst = [], 0.0
    for i in range(_positive_int("trials", cfg["trials"])):
        coeffs = {node: float(c) for node, c in zip(nodes, rng.uniform(-1, 1, len(nodes)))}
        nx, ntx = lp_norm(T.source(coeffs), r), lp_norm(T(coeffs), r)
        worst = max(worst, abs(ntx - nx))
        rows.append((i, nx, ntx, abs(ntx - nx)))
    image_ok = all(T.node_image(node).equals(d1[f(node)]) for node in nodes)
    _write_csv(out / "lift.csv", ["trial", "norm_x", "norm_Tx", "residual"], rows)
    results = {
        "isometry_residual": worst,
        "node_images_exact": image_ok,
        "tol": cfg["tol"],
        "checks": [c.to_dict() for c in T.checks],
        "map": f.to_pairs(),
    }
    return image_ok and worst <= cfg["tol"], results


def cmd_complex_check(cfg: dict, out: Path) -> tuple[bool, dict]:
    p, level, K = cfg["p"], cfg["depth"], cfg["K"]
    if p < 1:
        raise ConfigError(f"p must be >= 1, got {p}")
    if int(level) != level or level < 1:
        raise ConfigError(f"depth must be a positive integer, got {level}")
    if int(K) != K or K < 4:
        raise ConfigError(f"K must be an integer >= 4, got {K}")
    level, K = int(level), int(K)
    model = {"genuine": ComplexModel.genuine, "sum": ComplexModel.sum_of_parts}[cfg["norm"]](level, p)
    trials = _positive_int("trials", cfg["trials"])
    reports = check_abstract_complex_lp(model, trials=trials, tol=cfg["tol"], seed=cfg["seed"])
    rng = np.random.default_rng(cfg["seed"] + 1)
    g_worst, mod_excess = 0.0, 0.0
    for _ in range(trials):
        v0 = DyadicStep(level, rng.normal(size=2 ** level))
        v1 = DyadicStep(level, rng.normal(size=2 ** level))
        alpha, beta = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        g_worst = max(g_worst, complex_condition_residual(v0, v1, alpha, beta, p, model.norm_b, model.norm_c))
        w = ComplexPair(v0, v1)
        true = np.hypot(v0.values, v1.values)
        approx = modulus_theta_grid(w, K).values
        # one-sided: 0 <= true - approx <= (1 - cos(pi/K)) true
        mod_excess = max(mod_excess, float(np.max(true - approx - theta_grid_bound(K) * true)), float(np.max(approx - true)))
    failing = failed_conditions(reports)
    rows = [(name, rep.worst_residual, rep.tol, int(rep.passed)) for name, rep in reports.items()]
    _write_csv(out / "complex.csv", ["condition", "worst_residual", "tol", "pass"], rows)
    results = {
        "norm": model.name,
        "conditions": {name: rep.to_dict() for name, rep in reports.items()},
        "failing_conditions": failing,
        "witness_G_max": g_worst,
        "modulus_grid_bound_excess": mod_excess,
    }
    return not failing and mod_excess <= 1e-12, results


COMMANDS: dict[str, Callable[[dict, Path], tuple[bool, dict]]] = {
    "stable-verify": cmd_stable_verify,
    "verify-embedding": cmd_verify_embedding,
    "check-tn": cmd_check_tn,
    "lift-demo": cmd_lift_demo,
    "complex-check": cmd_complex_check,
}

HELP = {
    "stable-verify": "empirical characteristic function of stable samples vs exp(-sigma^r |t|^r)",
    "verify-embedding": "relative error of ||sum a_j f_j||_p against ||a||_r",
    "check-tn": "evaluate the finite theory T_n on its canonical model",
    "lift-demo": "lift a tree isomorphism of dyadic disintegrations and test the isometry",
    "complex-check": "abstract complex Lp conditions and the theta-grid modulus",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpembed", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lpembed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    def common(sp, tol: float):
        sp.add_argument("--seed", type=int, default=0, help="master seed")
        sp.add_argument("--tol", type=float, default=tol, help="pass tolerance")
        sp.add_argument("--out", type=Path, default=Path("runs"), help="output directory")
        sp.add_argument("--config", type=Path, help="JSON file whose keys override the flags")

    sp = sub.add_parser("stable-verify", help=HELP["stable-verify"], formatter_class=fmt)
    sp.add_argument("--r", type=float, default=2.0, help="stability index in (0, 2]")
    sp.add_argument("--sigma", type=float, default=1.0, help="scale")
    sp.add_argument("--N", type=int, default=10**5, help="sample size")
    sp.add_argument("--field", choices=["real", "complex"], default="real")
    common(sp, 0.02)

    sp = sub.add_parser("verify-embedding", help=HELP["verify-embedding"], formatter_class=fmt)
    sp.add_argument("--r", type=float, default=2.0)
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--m", type=int, default=4, help="number of basis vectors")
    sp.add_argument("--N", type=int, default=10**6)
    sp.add_argument("--trials", type=int, default=20, help="random coefficient vectors")
    sp.add_argument("--field", choices=["real", "complex"], default="real")
    common(sp, 0.05)

    sp = sub.add_parser("check-tn", help=HELP["check-tn"], formatter_class=fmt)
    sp.add_argument("--n", type=int, default=2, help="tree depth of T_n")
    sp.add_argument("--r", type=float, default=2.0)
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--mode", choices=["exact", "mc"], default="mc")
    sp.add_argument("--N", type=int, default=10**6)
    sp.add_argument("--max-den", dest="max_den", type=int, default=4, help="denominator bound of the scalar grids")
    sp.add_argument("--psi-tol", dest="psi_tol", type=float, default=0.05, help="tolerance for Psi in mc mode")
    sp.add_argument(
        "--lattice-axioms", dest="lattice_axioms", action="store_true", help="also evaluate the Lp axioms in mc mode"
    )
    common(sp, 1e-9)

    sp = sub.add_parser("lift-demo", help=HELP["lift-demo"], formatter_class=fmt)
    sp.add_argument("--r", type=float, default=1.5, help="exponent of the dyadic disintegration")
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--trials", type=int, default=100, help="random span elements")
    common(sp, 1e-10)

    sp = sub.add_parser("complex-check", help=HELP["complex-check"], formatter_class=fmt)
    sp.add_argument("--p", type=float, default=1.5)
    sp.add_argument("--depth", type=int, default=4, help="dyadic level of the step model")
    sp.add_argument("--K", type=int, default=256, help="theta grid size")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--norm", choices=["genuine", "sum"], default="genuine", help="candidate complex norm")
    common(sp, 1e-10)
    return parser


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    cfg = {k: v for k, v in vars(args).items() if k not in ("config", "out")}
    if args.config is not None:
        try:
            override = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(override, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(override) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(override)
    return cfg


def run(cfg: dict[str, Any], out: Path) -> tuple[bool, dict]:
    out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergentMomentWarning)
        passed, results = COMMANDS[cfg["command"]](cfg, out)
    report = {
        "command": cfg["command"],
        "config": cfg,
        "passed": bool(passed),
        "results": results,
        "metadata": {
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "version": __version__,
        },
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return bool(passed), report


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        passed, report = run(cfg, Path(args.out))
    except (ConfigError, ValueError) as exc:
        print(f"lpembed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{cfg['command']}: {'PASS' if passed else 'FAIL'} -> {Path(args.out) / 'report.json'}")
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
