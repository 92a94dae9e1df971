from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpembed.logic import syntax as ast
from lpembed.logic.evaluate import EvaluationError, QuantifierBudget, evaluate
from lpembed.logic.language import L_BANACH, L_BLATTICE, L_LPC
from lpembed.logic.models import Interpretation, LatticeModel, complex_lp_norm_plus
from lpembed.logic.parser import FormulaSyntaxError, parse_formula, parse_term, tokenize
from lpembed.logic.syntax import SubscriptError, free_variables, is_sentence, to_text


# -- parsing ---------------------------------------------------------------

EXAMPLES = [
    "d(0.5*c, 0.5*a + 0.5*b)",
    "norm(0)",
    "sup x . leq(norm(x), 1)",
    "inf x, y . absdiff(d(x, y), 1/2)",
    "max(norm(c), 1/3, d(c, 0))",
    "norm(oplus[1/2,-1/2](a, b))^3/2 + 2*norm(meet[1/2,1/2](abs(a), b))",
    "monus(norm(pos(c)), min(norm(c), 1))",
    "normplus(a, b) - 1/4*norm(a)",
    "sup x . inf y . d(join[1/2,1/2](x, y), 0)",
]


@pytest.mark.parametrize("text", EXAMPLES)
def test_roundtrip(text):
    f = parse_formula(text)
    assert parse_formula(to_text(f)) == f
    assert to_text(parse_formula(to_text(f))) == to_text(f)


def test_phi_shape():
    f = parse_formula("d(0.5*c, 0.5*a + 0.5*b)")
    half = Fraction(1, 2)
    assert f == ast.Dist(
        ast.Oplus(half, 0, ast.Const("c"), ast.Zero()),
        ast.Oplus(half, half, ast.Const("a"), ast.Const("b")),
    )


def test_norm_zero_is_atomic():
    assert parse_formula("norm(0)") == ast.Norm(ast.Zero())


def test_quantified_sentence():
    f = parse_formula("sup x . leq(norm(x), 1)")
    assert isinstance(f, ast.Quant) and f.kind == "sup" and f.var == "x"
    assert f.body.args[0] == ast.Norm(ast.Var("x"))
    assert is_sentence(f)
    assert free_variables(f.body) == {"x"}


def test_bound_vs_free_identifiers():
    f = parse_formula("sup x . d(x, y)")
    assert f.body.a == ast.Var("x") and f.body.b == ast.Const("y")


def test_subscript_constraint():
    with pytest.raises(SubscriptError) as exc:
        parse_formula("norm(oplus[3/4,1/2](a, b))")
    assert isinstance(exc.value, FormulaSyntaxError) and exc.value.position == 5
    with pytest.raises(SubscriptError):
        ast.Meet(1, Fraction(1, 10), ast.Zero(), ast.Zero())
    with pytest.raises(SubscriptError):
        parse_term("0.6*a + 0.6*b")


@pytest.mark.parametrize("bad,pos", [("norm(a", 6), ("d(a b)", 4), ("norm(a) $", 8), ("sup . norm(x)", 4)])
def test_syntax_error_position(bad, pos):
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula(bad)
    assert exc.value.position == pos


def test_tokenize_numbers():
    kinds = [(k, v) for k, v, _ in tokenize("3/4 0.25 1e-3")]
    assert kinds[:3] == [("num", "3/4"), ("num", "0.25"), ("num", "1e-3")]


def test_connective_arity():
    with pytest.raises(ValueError):
        ast.Conn("leq", (ast.Lit(0),))
    with pytest.raises(ValueError):
        ast.Conn("exp", (ast.Lit(0),))


def test_languages_nested():
    assert L_BANACH.issubset(L_BLATTICE) and L_BLATTICE.issubset(L_LPC)
    assert "meet" not in L_BANACH and "normplus" in L_LPC
    assert L_BANACH["oplus"].modulus(0.1) == pytest.approx(0.2)
    assert L_BANACH["norm"].modulus(0.1) == pytest.approx(0.1)
    assert L_BLATTICE["meet"].modulus(0.1) == pytest.approx(0.2)


# -- evaluation --------------------------------------------------------------


def l1():
    return Interpretation(LatticeModel.lp(2, 1.0), {"c": np.array([0.25, -0.5])})


def test_quantifier_free_is_exact():
    tv = evaluate(parse_formula("d(0, 0)"), l1())
    assert tv.value == 0 and tv.exact
    tv = evaluate(parse_formula("norm(c)"), l1())
    assert tv.value == pytest.approx(0.75) and tv.exact


def test_leq_connective():
    assert evaluate(parse_formula("leq(3/10, 7/10)"), l1()).value == 0
    assert evaluate(parse_formula("leq(7/10, 3/10)"), l1()).value == pytest.approx(0.4)


def test_truth_values_are_clipped():
    assert evaluate(parse_formula("2*norm(c) + 1"), l1()).value == 1.0
    assert evaluate(parse_formula("norm(c) - 1"), l1()).value == 0.0


def test_evaluation_errors():
    with pytest.raises(EvaluationError):
        evaluate(ast.Norm(ast.Var("x")), l1())
    with pytest.raises(EvaluationError):
        evaluate(parse_formula("norm(q)"), l1())
    banach = Interpretation(LatticeModel.lp(2, 1.0), {"c": np.array([0.1, 0.1])}, lattice=False)
    with pytest.raises(EvaluationError):
        evaluate(parse_formula("norm(abs(c))"), banach)
    with pytest.raises(EvaluationError):
        evaluate(parse_formula("normplus(c, c)"), l1())


def test_constants_must_lie_in_ball():
    with pytest.raises(ValueError):
        Interpretation(LatticeModel.lp(2, 2.0), {"c": np.array([1.0, 1.0])})


def test_normplus():
    model = LatticeModel.lp(2, 2.0)
    interp = Interpretation(model, {"a": np.array([0.3, 0.0]), "b": np.array([0.4, 0.0])},
                            norm_plus=complex_lp_norm_plus(model))
    assert evaluate(parse_formula("normplus(a, b)"), interp).value == pytest.approx(0.5)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_ball_closure(p):
    # oplus and meet with |s| + |t| <= 1 keep the unit ball
    rng = np.random.default_rng(0)
    model = LatticeModel.lp(3, p)
    for _ in range(200):
        x, y = (v / max(1.0, model.norm(v)) for v in rng.normal(size=(2, 3)))
        s = rng.uniform(-1, 1)
        t = (1 - abs(s)) * rng.uniform(-1, 1)
        interp = Interpretation(model, {"x": x, "y": y})
        for op in ("oplus", "meet"):
            term = ast.Oplus(s, t, ast.Const("x"), ast.Const("y")) if op == "oplus" else \
                ast.Meet(s, t, ast.Const("x"), ast.Const("y"))
            assert evaluate(ast.Norm(term), interp).value <= 1 + 1e-12


@given(
    st.lists(st.floats(-1, 1), min_size=12, max_size=12),
    st.floats(0, 0.1),
    st.fractions(-1, 1, max_denominator=8),
)
@settings(max_examples=100, deadline=None)
def test_modulus_compliance(vals, eps, s):
    model = LatticeModel.lp(3, 1.5)
    v = np.array(vals).reshape(4, 3)
    x, y, dx, dy = v
    x, y = x / max(1.0, model.norm(x)), y / max(1.0, model.norm(y))
    dx, dy = (eps * d / model.norm(d) if model.norm(d) > 0 else d for d in (dx, dy))
    t = (1 - abs(s)) / 2
    interp = Interpretation(model, {"x": x, "y": y, "u": x + dx, "w": y + dy}, ball_tol=1.0)
    # oplus: Delta(eps) = 2 eps in norm distance
    a = evaluate(parse_formula(f"d(oplus[{s},{t}](x, y), oplus[{s},{t}](u, w))"), interp).value
    assert 2 * a <= 2 * eps + 1e-12
    # meet: Delta(eps) = 2 eps
    a = evaluate(parse_formula(f"d(meet[{s},{t}](x, y), meet[{s},{t}](u, w))"), interp).value
    assert 2 * a <= 2 * eps + 1e-12
    # norm: Delta(eps) = eps
    n0 = evaluate(parse_formula("norm(x)"), interp).value
    n1 = evaluate(parse_formula("norm(u)"), interp).value
    assert abs(n0 - n1) <= eps + 1e-12


def test_metric_has_diameter_one():
    model = LatticeModel.lp(2, 2.0)
    interp = Interpretation(model, {"a": np.array([1.0, 0.0]), "b": np.array([-1.0, 0.0])})
    assert evaluate(parse_formula("d(a, b)"), interp).value == pytest.approx(1.0)


@pytest.mark.parametrize(
    "text,exact",
    [
        ("sup x . norm(x)", 1.0),
        ("inf x . norm(x)", 0.0),
        ("sup x . d(x, c)", 0.5 * (1 + 0.75)),  # attained at -c / ||c||
        ("inf x . absdiff(norm(x), 1/2)", 0.0),
        ("sup x . norm(meet[1/2,-1/2](x, c))", None),
    ],
)
def test_bracket_soundness(text, exact):
    interp = l1()
    tv = evaluate(parse_formula(text), interp)
    assert tv.lower <= tv.value <= tv.upper
    if exact is not None:
        assert tv.lower - 1e-12 <= exact <= tv.upper + 1e-12
        assert tv.value == pytest.approx(exact, abs=1e-3)


def test_bracket_against_dense_enumeration():
    # the ball of l^1.5_2 enumerated on a fine polar grid; the body is
    # 1-Lipschitz in d, so the grid maximum is within the mesh of the true sup
    model = LatticeModel.lp(2, 1.5)
    c = np.array([0.3, -0.2])
    interp = Interpretation(model, {"c": c})
    f = parse_formula("sup x . absdiff(d(x, c), norm(meet[1/2,1/2](x, c)))")
    theta = np.linspace(0, 2 * np.pi, 721)
    u = np.column_stack([np.cos(theta), np.sin(theta)])
    u /= model.norms(u)[:, None]
    xs = (np.linspace(0, 1, 201)[:, None, None] * u[None]).reshape(-1, 2)
    vals = np.abs(0.5 * model.norms(xs - c) - model.norms(np.minimum(xs / 2, c / 2)))
    best = float(vals.max())
    tv = evaluate(f, interp)
    assert tv.lower <= tv.value <= tv.upper
    assert best <= tv.upper + 1e-12
    assert tv.lower <= best + 0.01


def test_budget_monotonicity():
    model = LatticeModel.lp(2, 2.0)
    interp = Interpretation(model, {})
    f = parse_formula("sup x0, x1 . leq(norm(1/2*pos(x0))^1 + norm(1/2*pos(x1))^1, norm(oplus[1/2,1/2](pos(x0), pos(x1)))^1)")
    widths, lowers = [], []
    for n in (32, 128, 512):
        tv = evaluate(f, interp, QuantifierBudget(samples=n, refine_iters=0))
        widths.append(tv.upper - tv.lower)
        lowers.append(tv.lower)
    assert widths == sorted(widths, reverse=True)
    assert lowers == sorted(lowers)


def test_non_vectorized_norm_gives_trivial_other_side():
    model = LatticeModel(2, norm=lambda x: float(np.abs(x).sum()))
    tv = evaluate(parse_formula("sup x . norm(x)"), Interpretation(model, {}))
    assert tv.upper == 1.0 and tv.value == pytest.approx(1.0)
