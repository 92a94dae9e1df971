import cmath
import math

import numpy as np
import pytest

from lpembed.complexify import (
    ComplexModel,
    ComplexPair,
    check_abstract_complex_lp,
    complex_condition_residual,
    complex_lp_norm,
    complex_scale,
    eval_G_functionals,
    failed_conditions,
    modulus_theta_grid,
    theta_grid_bound,
)
from lpembed.spaces import DyadicStep, lp_norm


def rand_step(rng, level=3):
    return DyadicStep(level, rng.normal(size=2 ** level))


def rand_pair(rng, level=3):
    return ComplexPair(rand_step(rng, level), rand_step(rng, level))


def test_scaling_examples():
    rng = np.random.default_rng(0)
    f = rand_step(rng)
    v = ComplexPair.real(f)
    assert complex_scale(1, v).equals(v)
    iv = complex_scale(1j, v)
    assert iv.re.equals(DyadicStep.zero(3)) and iv.im.equals(f)
    w = complex_scale(cmath.exp(1j * math.pi / 4), complex_scale(cmath.exp(1j * math.pi / 4), v))
    assert np.allclose(w.re.values, 0, atol=1e-15) and np.allclose(w.im.values, f.values)


def test_complex_linear_laws():
    rng = np.random.default_rng(1)
    for _ in range(50):
        v = rand_pair(rng)
        z, w = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        lhs = complex_scale(z, complex_scale(w, v))
        rhs = complex_scale(z * w, v)
        np.testing.assert_allclose(lhs.to_step().values, rhs.to_step().values, atol=1e-12)
        iv = complex_scale(1j, v)
        assert iv.re.equals(-v.im) and iv.im.equals(v.re)
        # agrees with native complex arithmetic
        np.testing.assert_allclose((z * v.to_step()).values, complex_scale(z, v).to_step().values, atol=1e-12)


def test_pair_arithmetic_and_record():
    rng = np.random.default_rng(2)
    a, b = rand_pair(rng), rand_pair(rng)
    np.testing.assert_allclose(((a + b) - b).to_step().values, a.to_step().values, atol=1e-12)
    back = ComplexPair.from_record(a.to_record())
    assert back.equals(a) and a.to_record()["field"] == "complex"
    assert ComplexPair.from_step(a.to_step()).equals(a)
    with pytest.raises(ValueError):
        ComplexPair(a.to_step(), a.re)


def test_theta_grid_examples():
    f = DyadicStep(2, np.array([0.0, 1.0, 2.5, 0.3]))
    for K in (4, 7, 64):
        assert modulus_theta_grid(ComplexPair.real(f), K).equals(f)
    assert modulus_theta_grid(ComplexPair.imaginary(f), 8).equals(f)
    ones = DyadicStep.constant(1.0)
    g = modulus_theta_grid(ComplexPair(ones, ones), 4)
    assert g.values[0] == 1.0
    assert math.sqrt(2) - 1.0 == pytest.approx(theta_grid_bound(4) * math.sqrt(2))
    with pytest.raises(ValueError):
        modulus_theta_grid(ComplexPair(ones, ones), 3)


def test_theta_grid_bound_and_monotone():
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rand_pair(rng, 4)
        true = np.hypot(v.re.values, v.im.values)
        prev = None
        for K in (8, 16, 64, 256):
            g = modulus_theta_grid(v, K).values
            assert np.all(g <= true + 1e-12)
            assert np.all(true - g <= theta_grid_bound(K) * true + 1e-12)
            if prev is not None:
                assert np.all(g >= prev - 1e-12)  # nested grids
            prev = g


def test_G_functionals_examples():
    rng = np.random.default_rng(4)
    v0 = DyadicStep.indicator(0, 0.5, 3) * 2.0
    v1 = DyadicStep.indicator(0.5, 1, 3) * -1.0
    g = eval_G_functionals(v0, v1, v0, v1, 1, 1, 1.5)
    assert max(g) <= 1e-12
    f = rand_step(rng)
    g0, g1, g2 = eval_G_functionals(f, f, f, f, 1, -1, 1.0)
    assert g1 == pytest.approx(2 * lp_norm(f, 1.0))
    zero = DyadicStep.zero(3)
    assert eval_G_functionals(zero, f, zero, f, 1j, 1, 2.0)[2] == 0


def test_disjointify_witness_is_small_for_genuine_norm():
    rng = np.random.default_rng(5)
    for p in (1.0, 1.5, 2.0):
        for _ in range(50):
            v0, v1 = rand_step(rng), rand_step(rng)
            alpha, beta = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            assert complex_condition_residual(v0, v1, alpha, beta, p) <= 1e-10


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
def test_genuine_norm_passes(p):
    reps = check_abstract_complex_lp(ComplexModel.genuine(4, p), trials=50, tol=1e-10)
    assert failed_conditions(reps) == []
    assert reps["condition_1"].worst_residual == 0


def test_sum_of_parts_fails_condition_2():
    reps = check_abstract_complex_lp(ComplexModel.sum_of_parts(3, 2.0), trials=10)
    assert failed_conditions(reps) == ["condition_2"]
    witness = [f for f in reps["condition_2"].failures if f.get("witness") == "indicator witness"]
    assert witness and witness[0]["residual"] == pytest.approx(1.0)


def test_max_of_parts_fails():
    model = ComplexModel(3, 1.5, lambda w: max(lp_norm(w.re, 1.5), lp_norm(w.im, 1.5)), "max")
    assert "condition_2" in failed_conditions(check_abstract_complex_lp(model, trials=10))


def test_complex_norm_matches_native():
    rng = np.random.default_rng(6)
    v = rand_pair(rng)
    assert complex_lp_norm(v, 1.5) == pytest.approx(lp_norm(v.to_step(), 1.5))
    with pytest.raises(ValueError):
        check_abstract_complex_lp(ComplexModel.genuine(2, 1.0), trials=0)
