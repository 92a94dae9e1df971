import numpy as np
import pytest

from lpembed.embedding import build_embedding
from lpembed.logic.evaluate import evaluate
from lpembed.logic.models import Interpretation, LatticeModel
from lpembed.logic.theories import (
    axioms_T_lp_real,
    binary_strings,
    build_Tn_model,
    check_theory,
    const_name,
    gamma_target,
    lp_axiom_grid,
    parse_const_name,
    phi_grid,
    psi_grid,
    rational_grid,
    read_theory,
    sentence_gamma,
    sentence_phi,
    sentences_phi_psi_gamma,
    theory_T_n,
    write_theory,
)


def test_grids():
    assert rational_grid(2, 0, 1) == [0, 0.5, 1]
    assert all(abs(s) <= 0.5 for s in phi_grid())
    assert all(abs(s) + abs(t) <= 1 for s, t in psi_grid(4))
    assert (0.5, 0.5) in lp_axiom_grid(2)
    assert len(phi_grid(8)) == len(set(phi_grid(8)))


def test_axiom_grid_validation():
    assert axioms_T_lp_real(1, []) == []
    with pytest.raises(ValueError):
        axioms_T_lp_real(1, [(0.75, 0.5)])
    with pytest.raises(ValueError):
        axioms_T_lp_real(0.5, [(0.5, 0.5)])


def test_lp_axiom_discriminates_l1_from_l2():
    [ax] = axioms_T_lp_real(1, [(0.5, 0.5)])
    on_l1 = evaluate(ax.formula, Interpretation(LatticeModel.lp(2, 1.0), {}))
    on_l2 = evaluate(ax.formula, Interpretation(LatticeModel.lp(2, 2.0), {}))
    assert on_l1.value <= 1e-12 and on_l1.lower <= 1e-12
    assert on_l2.value >= 0.05
    # brute force on the l2 ball: x0 = e1, x1 = e2 gives 1/2 + 1/2 - 1/sqrt(2)
    assert on_l2.value == pytest.approx(1 - 2 ** -0.5, abs=1e-3)


def test_const_names():
    assert const_name(()) == "c_e" and const_name((0, 1)) == "c_01"
    assert parse_const_name("c_01") == (0, 1) and parse_const_name("c_e") == ()
    assert parse_const_name("x") is None and parse_const_name("c_2") is None


def test_sentence_families():
    assert sentence_phi((), 0.5).name == "Phi[c_e,1/2]"
    with pytest.raises(ValueError):
        sentence_phi((), 0.6)
    assert gamma_target((0, 1), 2) == 0.5
    sents = sentences_phi_psi_gamma((1,), 2, [0.5], [(0.5, 0.5)])
    assert [s.family for s in sents] == ["Phi", "Psi", "Gamma"]
    names = {c for s in sents for c in [s.text]}
    assert any("c_10" in n and "c_11" in n for n in names)
    with pytest.raises(ValueError):
        sentences_phi_psi_gamma((2,), 2, [], [])


def test_theory_size():
    n = 2
    T = theory_T_n(n, 2, 1, [0.5], [(0.5, 0.5)], [(0.5, 0.5)])
    nodes = len(binary_strings(n))
    inner = len(binary_strings(n - 1))
    assert len(T) == 1 + inner + 2 * nodes
    with pytest.raises(ValueError):
        theory_T_n(-1, 2, 1)


def test_T0_on_model():
    interp = build_Tn_model(0, 1.5, 1.5)
    assert evaluate(sentence_gamma((), 1.5).formula, interp).value <= 1e-12
    assert check_theory(interp, theory_T_n(0, 1.5, 1.5)).passed


def test_T2_exact_model():
    interp = build_Tn_model(2, 2.0, 2.0)
    rep = check_theory(interp, theory_T_n(2, 2.0, 2.0), tol=1e-12)
    assert rep.passed, rep.max_by_family()


def test_zero_model_fails_gamma():
    model = LatticeModel.dyadic(2, 2.0)
    consts = {const_name(s): model.zero() for s in binary_strings(2)}
    interp = Interpretation(model, consts, default_constant=lambda name: model.zero())
    rep = check_theory(interp, theory_T_n(2, 2.0, 2.0, [0.5], [(0.5, 0.5)], []))
    gammas = {r.name: r.value for r in rep.results if r.family == "Gamma"}
    assert gammas["Gamma[c_e]"] == pytest.approx(1.0)
    assert gammas["Gamma[c_01]"] == pytest.approx(0.5)
    assert not rep.passed


def test_empty_theory_passes():
    assert check_theory(build_Tn_model(1, 2.0, 2.0), []).passed


def test_constants_below_depth_are_zero():
    interp = build_Tn_model(1, 2.0, 2.0)
    assert not np.any(interp.constant("c_011"))
    with pytest.raises(KeyError):
        interp.constant("other")


def test_mc_model_leaves_and_guards():
    basis = build_embedding(2.0, 1.0, 4, 50_000, seed=0)
    interp = build_Tn_model(2, 2.0, 1.0, basis)
    for sigma in [(0, 0), (1, 1)]:
        assert evaluate(sentence_gamma(sigma, 2.0).formula, interp).value <= 1e-9
    with pytest.raises(ValueError):
        build_Tn_model(3, 2.0, 1.0, basis)
    with pytest.raises(ValueError):
        build_Tn_model(2, 1.5, 1.0, basis)
    with pytest.raises(ValueError):
        build_Tn_model(2, 2.0, 1.0)


def test_theory_file_roundtrip(tmp_path):
    T = theory_T_n(1, 1.5, 1.5, [0.5, -0.25], [(0.5, 0.5)], [(0.5, 0.5)])
    write_theory(T, tmp_path / "t.txt")
    back = read_theory(tmp_path / "t.txt")
    assert [(s.name, s.formula, s.family) for s in back] == [(s.name, s.formula, s.family) for s in T]


def test_report_dict():
    rep = check_theory(build_Tn_model(1, 2.0, 2.0), theory_T_n(1, 2.0, 2.0, [0.5], [], [(0.5, 0.5)]))
    d = rep.to_dict()
    assert d["passed"] and set(d["max_by_family"]) == {"Phi", "Gamma", "Lp"}
    assert all(s["bracket"][0] <= s["value"] <= s["bracket"][1] for s in d["sentences"])
