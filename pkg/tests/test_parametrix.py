from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgnf import profiles
from kgnf.parametrix import (SQRT8, build_k, chi1, kernel_hat, kernel_u, parametrix_residual,
                             phase_psi, s_nodes, stationary_point_location, transform_extent)
from kgnf.spectral import GridSpec

import oracles

BUMP = profiles.fourier_bump((1.5, 4.2))


@given(st.floats(1.0, 300.0), st.floats(0.05, 1.0), st.floats(-50.0, 50.0))
def test_phase_matches_quadrature(rho, frac, xi):
    s = max(frac * rho, 0.5)
    assert phase_psi(rho, s, xi) == pytest.approx(oracles.psi_quad(rho, s, xi), abs=1e-10, rel=1e-12)


def test_phase_basic_properties():
    assert phase_psi(5.0, 5.0, 3.0) == 0.0
    assert phase_psi(5.0, 2.0, 0.0) == pytest.approx(3.0)
    h, rho, s, xi = 1e-5, 7.0, 2.0, 4.0
    d = (phase_psi(rho + h, s, xi) - phase_psi(rho - h, s, xi)) / (2 * h)
    assert d == pytest.approx(math.sqrt(xi * xi / rho ** 2 + 1), rel=1e-8)
    with pytest.raises(ValueError):
        phase_psi(2.0, 0.0, 1.0)


@given(st.floats(1.0, 100.0), st.floats(0.1, 1.0), st.floats(-30.0, 30.0))
def test_fundamental_solution_bounded(rho, frac, xi):
    assert abs(kernel_u(rho, max(frac * rho, 0.5), xi)) <= 1.0


def test_cutoff_shape():
    r = np.linspace(0, 5, 501)
    c = chi1(r)
    assert np.all(c[(r >= 0.25) & (r <= 2.0)] == 1.0)
    assert np.all(c[(r <= 0.125) | (r >= 4.0)] == 0.0)


def test_s_quadrature_exact_for_smooth_integrand():
    for rho in (3.0, 40.0, 200.0):
        s, w = s_nodes(rho)
        lo = max(1.0, rho / 8)
        assert np.sum(w) == pytest.approx(rho - lo, rel=1e-13)
        assert np.sum(w * np.cos(s)) == pytest.approx(np.sin(rho) - np.sin(lo), abs=1e-11)
    assert s_nodes(1.0)[0].size == 0


def test_transform_extent():
    assert transform_extent(BUMP) == 4.2
    assert transform_extent(profiles.zero()) == 0.0
    assert 10 < transform_extent(profiles.gaussian()) < 13


def test_kernel_linear_in_beta():
    xi = np.linspace(-150, 150, 31)
    k = kernel_hat(3, BUMP, 40.0, xi)
    assert np.allclose(kernel_hat(3, BUMP.scaled(-2.0), 40.0, xi), -2 * k, atol=1e-14)
    other = profiles.fourier_bump((2.0, 3.5))
    both = profiles.from_transform("sum", lambda q: BUMP.transform(q) + other.transform(q),
                                   support=[1.5, 4.2])
    assert np.allclose(kernel_hat(1, both, 40.0, xi),
                       kernel_hat(1, BUMP, 40.0, xi) + kernel_hat(1, other, 40.0, xi), atol=1e-13)


def test_kernel_index_checked():
    with pytest.raises(ValueError):
        kernel_hat(2, BUMP, 10.0, np.zeros(3))


def test_zero_profile_gives_zero_kernel():
    k = build_k(3, profiles.zero(), 20.0, GridSpec(6.0, 256))
    assert np.all(k.k_hat == 0)
    r = parametrix_residual(3, profiles.zero(), 20.0, GridSpec(6.0, 256))
    assert r.stats["k_sup"] == 0 and r.stats["e_sup"] == 0


def test_resonant_kernel_larger_than_non_resonant():
    g = GridSpec(6.0, 4096)
    k1 = build_k(1, BUMP, 60.0, g).windowed_sup()
    k3 = build_k(3, BUMP, 60.0, g).windowed_sup()
    assert k1 < k3


def test_residual_small_against_kernel():
    r = parametrix_residual(3, BUMP, 40.0, GridSpec(6.0, 4096))
    assert r.stats["e_sup"] < 0.2 * r.stats["k_sup"]
    assert r.stats["fd_error"] < 0.5 * r.stats["e_sup"]
    # resonance builds up at earlier s, where xi/s = sqrt8, so xi/rho sits below sqrt8
    assert 0 < r.stats["peak_frequency"] < SQRT8


def test_stationary_point_near_sqrt8():
    rho = 200.0
    xi = SQRT8 * 100.0
    s = stationary_point_location(3, BUMP, rho, xi)
    assert abs(xi / s - SQRT8) < 0.02 * SQRT8
