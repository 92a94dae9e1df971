import math
import warnings

import numpy as np
import pytest
from scipy import stats

from lpembed.spaces import Field
from lpembed.stable import (
    CF_T_GRID,
    DivergentMomentWarning,
    SampleVector,
    StableSpec,
    cf_grid_errors,
    empirical_cf,
    empirical_lp_norm,
    independent_family,
    median_of_means,
    sample,
    stream_generator,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        StableSpec(3.0)
    with pytest.raises(ValueError):
        StableSpec(0.0)
    with pytest.raises(ValueError):
        StableSpec(1.5, -1.0)


def test_same_seed_same_stream_is_reproducible():
    a = sample(StableSpec(1.5), 1000, seed=7, stream_id=3)
    b = sample(StableSpec(1.5), 1000, seed=7, stream_id=3)
    c = sample(StableSpec(1.5), 1000, seed=7, stream_id=4)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_streams_do_not_depend_on_order():
    fam = independent_family(StableSpec(2.0), 3, 500, seed=1)
    assert np.array_equal(fam[2].samples, sample(StableSpec(2.0), 500, seed=1, stream_id=2).samples)
    assert stream_generator(1, 2).random() == stream_generator(1, 2).random()


def test_scale_factors_out():
    for field in (Field.REAL, Field.COMPLEX):
        one = sample(StableSpec(1.3, 1.0, field), 2000, seed=5)
        three = sample(StableSpec(1.3, 3.0, field), 2000, seed=5)
        np.testing.assert_allclose(three.samples, 3.0 * one.samples)


def test_zero_scale_is_degenerate():
    sv = sample(StableSpec(1.5, 0.0), 100, seed=0)
    assert not np.any(sv.samples)
    assert all(abs(e - t) == 0 for _, e, t in cf_grid_errors(sv, sv.spec))


def test_gaussian_case_matches_normal():
    # r = 2 is N(0, 2 sigma^2)
    sv = sample(StableSpec(2.0, 1.0), 200_000, seed=11)
    ks = stats.kstest(sv.samples, stats.norm(scale=math.sqrt(2)).cdf)
    assert ks.pvalue > 1e-3
    assert np.var(sv.samples) == pytest.approx(2.0, rel=0.02)


def test_cauchy_case_matches_cauchy():
    sv = sample(StableSpec(1.0, 1.0), 200_000, seed=12)
    assert np.median(np.abs(sv.samples)) == pytest.approx(1.0, rel=0.02)
    ks = stats.kstest(sv.samples, stats.cauchy.cdf)
    assert ks.pvalue > 1e-3


def test_intermediate_r_against_reference_cdf():
    # independent oracle: scipy's stable law (beta = 0 has CF exp(-|t|^alpha))
    sv = sample(StableSpec(1.5, 1.0), 200_000, seed=13)
    for x in (-2.0, 0.5, 1.0, 3.0):
        ref = stats.levy_stable.cdf(x, 1.5, 0.0)
        assert np.mean(sv.samples <= x) == pytest.approx(ref, abs=0.005)


@pytest.mark.parametrize("r", [1.0, 1.5, 2.0])
def test_cf_grid(r):
    spec = StableSpec(r)
    sv = sample(spec, 100_000, seed=0)
    errors = [abs(e - t) for _, e, t in cf_grid_errors(sv, spec)]
    assert len(errors) == len(CF_T_GRID) == 8
    assert max(errors) <= 0.02


@pytest.mark.parametrize("r", [1.2, 1.7, 2.0])
def test_complex_cf_is_isotropic(r):
    spec = StableSpec(r, 1.0, Field.COMPLEX)
    sv = sample(spec, 200_000, seed=3)
    for z in (1.0, 1j, (1 + 1j) / math.sqrt(2), 0.5 - 1.5j):
        assert empirical_cf(sv, z) == pytest.approx(spec.theoretical_cf(z), abs=0.01)
    assert sv.meta["c_measured"] == pytest.approx(sv.meta["c_target"], abs=0.02)


def test_empirical_cf_at_zero():
    sv = sample(StableSpec(1.0), 10, seed=0)
    assert empirical_cf(sv, 0) == 1.0


def test_gaussian_absolute_moment():
    # E|N(0, 2)| = 2 / sqrt(pi)
    sv = sample(StableSpec(2.0), 10**6, seed=2)
    assert empirical_lp_norm(sv, 1) == pytest.approx(2 / math.sqrt(math.pi), rel=0.01)
    # E|N(0,2)|^2 = 2
    assert empirical_lp_norm(sv, 2) == pytest.approx(math.sqrt(2), rel=0.01)


def test_lp_norm_of_cauchy_p_below_one_is_rejected():
    with pytest.raises(ValueError):
        empirical_lp_norm(np.ones(3), 0.5)


def test_divergent_moment_warning():
    sv = sample(StableSpec(1.2), 1000, seed=0)
    with pytest.warns(DivergentMomentWarning):
        empirical_lp_norm(sv, 1.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        empirical_lp_norm(sv, 1.0)


def test_median_of_means():
    assert median_of_means(np.arange(10.0), blocks=1) == 4.5
    vals = np.ones(1000)
    vals[0] = 1e9  # one wild block does not move the median
    assert median_of_means(vals, blocks=32) == 1.0


def test_sample_vector_arithmetic():
    a = SampleVector(np.array([1.0, 2.0]))
    b = SampleVector(np.array([3.0, -1.0]))
    np.testing.assert_array_equal((2 * a - b).samples, [-1.0, 5.0])
    with pytest.raises(ValueError):
        a + SampleVector(np.ones(3))


@pytest.mark.parametrize("field", [Field.REAL, Field.COMPLEX])
def test_save_load_roundtrip(tmp_path, field):
    sv = sample(StableSpec(1.4, 2.0, field), 257, seed=9, stream_id=2)
    sv.save(tmp_path / "x.bin")
    back = SampleVector.load(tmp_path / "x.bin")
    np.testing.assert_array_equal(back.samples, sv.samples)
    assert back.spec == sv.spec and back.stream_id == 2 and back.seed == 9
    sv.to_csv(tmp_path / "x.csv")
    assert (tmp_path / "x.csv").read_text().count("\n") == 258
