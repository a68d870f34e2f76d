from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kgnf import profiles
from kgnf.cubic import (SQRT8, ResonanceError, build_w2_zero_resonance,
                        cancellation_identity_residual, classify_resonance, cutoff_weight,
                        dyadic_beta_bands, eval_F, eval_F1, eval_F2, f_from_g, f_odd_from_g,
                        four_system_residual, g_from_f, g_odd_from_f, max_band_index,
                        solve_g_system, sqrt8_coefficients_from_parametrix)
from kgnf.spectral import GridSpec

import oracles

ints = arrays(np.int64, 6, elements=st.integers(-50, 50))
floats = st.floats(-1e3, 1e3)


def sqrt8_zero_profile():
    """Gaussian times (zeta^2 - 8)^2: zero at +-sqrt8, nonzero at 0."""
    return profiles.from_transform(
        "gauss_sqrt8", lambda k: np.sqrt(np.pi) * np.exp(-k * k / 4) * (k * k - 8) ** 2 / 64 + 0j,
        support_radius=10.0)


@given(ints, ints, st.integers(0, 3))
def test_monomial_chain_matches_exact_algebra(v, vd, i):
    d1 = oracles.poly_derivative(oracles.monomial(i))
    d2 = oracles.poly_derivative(d1)
    assert np.array_equal(eval_F1(i, v, vd), oracles.poly_eval(d1, v, vd))
    assert np.array_equal(eval_F2(i, v, vd), oracles.poly_eval(d2, v, vd))


def test_monomial_chain_along_free_oscillation():
    t, h = np.linspace(0, 6, 25), 1e-4
    for i in range(4):
        F = lambda s: eval_F(i, np.cos(s), -np.sin(s))
        fd1 = (F(t + h) - F(t - h)) / (2 * h)
        fd2 = (F(t + h) - 2 * F(t) + F(t - h)) / h ** 2
        assert np.allclose(fd1, eval_F1(i, np.cos(t), -np.sin(t)), atol=1e-7)
        assert np.allclose(fd2, eval_F2(i, np.cos(t), -np.sin(t)), atol=1e-5)


def test_monomial_index_checked():
    assert np.all(eval_F(4, np.ones(3), np.ones(3)) == 0)
    with pytest.raises(ValueError):
        eval_F1(4, 1.0, 1.0)
    with pytest.raises(ValueError):
        eval_F2(-1, 1.0, 1.0)


@given(floats, floats)
def test_coefficient_maps_invert(a, b):
    assert np.allclose(g_from_f(*f_from_g(a, b)), (a, b), rtol=1e-12, atol=1e-9)
    assert np.allclose(g_odd_from_f(*f_odd_from_g(a, b)), (a, b), rtol=1e-12, atol=1e-9)


def test_classifications():
    assert classify_resonance(profiles.gaussian()).classification == "both"
    assert classify_resonance(profiles.gaussian_dd()).classification == "resonant_at_sqrt8"
    assert classify_resonance(profiles.fourier_bump((0.5, 2.5))).classification == "non_resonant"
    assert classify_resonance(profiles.fourier_bump((2.0, 4.0))).classification == "resonant_at_sqrt8"
    assert classify_resonance(sqrt8_zero_profile()).classification == "resonant_at_0"
    assert classify_resonance(profiles.zero()).classification == "non_resonant"


@given(st.floats(-5, 5))
def test_classification_translation_invariant(shift):
    for beta in (profiles.gaussian(), profiles.gaussian_dd(), sqrt8_zero_profile()):
        assert (classify_resonance(beta.translated(shift)).classification
                == classify_resonance(beta).classification)


def test_resonant_profiles_raise():
    with pytest.raises(ResonanceError):
        solve_g_system(profiles.gaussian())
    with pytest.raises(ResonanceError):
        solve_g_system(profiles.gaussian_dd())
    with pytest.raises(ResonanceError):
        solve_g_system(sqrt8_zero_profile())


def test_g_system_residuals():
    nf = solve_g_system(profiles.fourier_bump((0.5, 2.5)))
    r = nf.residuals()
    assert r["g0"] < 1e-10 and r["g2"] < 1e-10
    assert np.isrealobj(nf.f0)


def test_g_system_against_dense_solve():
    g = GridSpec(32.0, 256)
    beta = profiles.fourier_bump((0.5, 2.5))
    nf = solve_g_system(beta, g)
    eye = np.eye(g.points)
    d2 = np.column_stack([oracles.fourier_matrix_derivative(eye[:, j], g, 2) for j in range(g.points)])
    g2 = np.linalg.solve(d2 + 8 * eye, -nf.beta_values)
    g0, *_ = np.linalg.lstsq(d2, -3 * nf.beta_values, rcond=1e-12)
    g0 -= g0.mean()
    scale = np.max(np.abs(nf.beta_values))
    assert np.max(np.abs(g2 - nf.g2)) < 1e-9 * scale
    assert np.max(np.abs(g0 - (nf.g0 - nf.g0.mean()))) < 1e-9 * scale


def test_pointwise_cancellation():
    nf = solve_g_system(profiles.fourier_bump((0.5, 2.5)))
    rng = np.random.default_rng(0)
    v = rng.uniform(-1, 1, nf.grid.points)
    vd = rng.uniform(-1, 1, nf.grid.points)
    assert cancellation_identity_residual(nf, v, vd) < 1e-9


def test_band_bookkeeping():
    assert max_band_index(16.0) == 2
    assert max_band_index(15.9) == 1
    with pytest.raises(ValueError):
        max_band_index(0.5)
    assert cutoff_weight(0, 100.0) == 1.0
    assert cutoff_weight(5, 100.0) == 0.0
    bands = dyadic_beta_bands(profiles.gaussian_dd(), 256.0)
    assert bands.js == (0, 1, 2, 3, 4)
    zeta = np.linspace(-10, 10, 2001)
    assert np.max(np.abs(bands.reconstruct_hat(zeta) - bands.beta.transform(zeta))) < 1e-14


def test_w2_zero_and_homogeneity():
    g = GridSpec(8.0, 512)
    from kgnf.harness import split_beta
    beta = split_beta(profiles.gaussian_dd()).near0
    rng = np.random.default_rng(1)
    from kgnf.quadratic import random_band_limited
    w, wd = random_band_limited(g, rng), random_band_limited(g, rng)
    assert np.all(build_w2_zero_resonance(w, wd, profiles.zero(), 16.0, g).w2 == 0)
    assert np.all(build_w2_zero_resonance(0 * w, 0 * wd, beta, 16.0, g).w2 == 0)
    one = build_w2_zero_resonance(w, wd, beta, 16.0, g)
    two = build_w2_zero_resonance(2 * w, 2 * wd, beta, 16.0, g)
    assert np.allclose(two.w2, 8 * one.w2, atol=1e-13)
    assert set(one.pieces) <= {0, 1, 2, 3}
    with pytest.raises(ResonanceError):
        build_w2_zero_resonance(w, wd, profiles.fourier_bump((2.0, 4.0)), 16.0, g)


def test_sqrt8_coefficients_round_trip():
    rng = np.random.default_rng(2)
    g = rng.standard_normal((4, 10))
    rho = 3.7
    k1 = (g[0] + 1j * g[1]) * np.exp(1j * rho) / 3
    k3 = (g[2] + 1j * g[3]) * np.exp(3j * rho)
    c = sqrt8_coefficients_from_parametrix(k1, k3, rho)
    assert np.allclose(g_from_f(c.f0, c.f2), (g[0], g[2]))
    assert np.allclose(g_odd_from_f(c.f1, c.f3), (g[1], g[3]))
    with pytest.raises(ValueError):
        four_system_residual([c, c], rho, 0.1, profiles.zero(), GridSpec(1.0, 10))


def test_sqrt8_constant():
    assert SQRT8 ** 2 == pytest.approx(8.0)
