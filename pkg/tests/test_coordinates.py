from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgnf import profiles
from kgnf.coordinates import (SupportOverflowWarning, beta_scaled_field, cartesian_to_hyperbolic,
                              conjugate, conjugation_identity_residual, hyperbolic_to_cartesian,
                              metric_jacobian_error, r_beta_bound_check, remainder_r_beta,
                              remainder_values, unconjugate)
from kgnf.spectral import Field, GridSpec


def test_cartesian_example():
    p = cartesian_to_hyperbolic(5.0, 3.0)
    assert p.rho == pytest.approx(4.0)
    assert p.y == pytest.approx(np.log(2.0))
    assert np.allclose(p.to_cartesian(), (5.0, 3.0))


@given(st.floats(1.0, 1e3), st.floats(-5.0, 5.0))
def test_round_trip(rho, y):
    t, x = hyperbolic_to_cartesian(rho, y)
    p = cartesian_to_hyperbolic(t, x)
    assert p.rho == pytest.approx(rho, rel=1e-10)
    assert p.y == pytest.approx(y, abs=1e-9)


def test_outside_cone_rejected():
    for t, x in [(1.0, 1.0), (1.0, -2.0), (0.0, 0.0)]:
        with pytest.raises(ValueError):
            cartesian_to_hyperbolic(t, x)


def test_metric_pullback():
    rho, y = np.meshgrid(np.linspace(1, 50, 20), np.linspace(-3, 3, 21))
    assert metric_jacobian_error(rho.ravel(), y.ravel()) < 1e-12


def test_conjugate_round_trip():
    g = GridSpec(4.0, 64)
    f = Field(g, np.cos(g.y))
    assert np.allclose(unconjugate(conjugate(f, 9.0), 9.0).values, f.values)
    assert np.allclose(conjugate(f, 9.0).values, 3 * f.values)
    with pytest.raises(ValueError):
        conjugate(f, 0.5)


def test_conjugation_identity():
    g = GridSpec(np.pi, 64)

    def u(r):
        return np.cos(2 * r) * np.cos(g.y) / r + np.sin(r) * np.sin(3 * g.y) / r ** 2

    for rho in (2.0, 5.0, 20.0):
        left, right = conjugation_identity_residual(u, g, rho)
        assert np.max(np.abs(left - right)) < 1e-8


def test_remainder_vanishes_at_origin_and_for_zero_beta():
    g = GridSpec(2.0, 64)
    r = remainder_r_beta(profiles.gaussian(), 4.0, g)
    assert r.values[np.argmin(np.abs(g.y))] == 0.0
    z = remainder_r_beta(profiles.zero(), 4.0, g)
    assert np.all(z.values == 0)


def test_remainder_taylor_expansion():
    # beta(rho sinh y) - beta(rho y) = beta'(rho y) rho y^3 / 6 + O(rho y^5 + rho^2 y^6)
    beta = profiles.gaussian()
    rho = 2.0
    y = np.array([1e-2, 2e-2, 4e-2])
    lead = beta.derivative(rho * y, 1) * rho * y ** 3 / 6
    err = np.abs(remainder_values(beta, rho, y) - lead)
    assert np.all(err < 5 * rho ** 2 * y ** 6 + rho * y ** 5)


def test_support_overflow_warns():
    g = GridSpec(1.0, 64)
    with pytest.warns(SupportOverflowWarning):
        beta_scaled_field(profiles.sech_pow(0.5), 1.0, g)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        beta_scaled_field(profiles.gaussian(), 10.0, g)


def test_r_beta_decay_rate():
    rep = r_beta_bound_check(profiles.gaussian(), [8.0, 32.0, 128.0], ks=(0, 1), ms=(0,),
                             samples_per_unit=1000)
    assert rep["exponent"] < -1.8
    assert all(np.isfinite(row["ratio"]) for row in rep["rows"])
    zero = r_beta_bound_check(profiles.zero(), [8.0, 32.0], samples_per_unit=200)
    assert zero["exponent"] is None
    assert all(row["sup"] == 0 for row in zero["rows"])
