from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from kgnf import profiles
from kgnf.solver import (NonlinearityParams, NumericalFailure, SimulationState, bootstrap_monitor,
                         convergence_order, energy_e0, geometric_checkpoints, initial_data_bump,
                         linear_energy, linear_energy_loss_rate, low_frequency_ode_monitor,
                         make_state, run, sample_slices, step, trig_interpolate)
from kgnf.spectral import GridSpec

GRID = GridSpec(4.0, 128)


def mode_state(k, drho, params=NonlinearityParams(), grid=GRID):
    xi = grid.xi[k]
    return SimulationState(grid, 1.0, np.cos(xi * grid.y), np.zeros(grid.points), drho, params)


def test_state_validation():
    with pytest.raises(ValueError):
        SimulationState(GRID, 0.5, np.zeros(128), np.zeros(128), 0.05)
    with pytest.raises(ValueError):
        SimulationState(GRID, 1.0, np.zeros(128), np.zeros(128), 0.2)
    with pytest.raises(ValueError):
        SimulationState(GRID, 1.0, np.zeros(64), np.zeros(128), 0.05)
    with pytest.raises(ValueError):
        initial_data_bump(GRID, 0.1, width=0.8)


def test_zero_state_stays_zero():
    s = SimulationState(GRID, 1.0, np.zeros(128), np.zeros(128), 0.05,
                        NonlinearityParams(1.0, 1.0, profiles.gaussian()))
    final, ledger = run(s, 5.0)
    assert np.all(final.v == 0) and np.all(final.v_dot == 0)
    assert all(e == 0 for e in ledger.e0)


def test_equal_end_gives_empty_ledger():
    s = make_state(GRID, 0.1, NonlinearityParams())
    final, ledger = run(s, 1.0)
    assert len(ledger) == 0 and final is s
    with pytest.raises(ValueError):
        run(s, 0.5)


def test_checkpoints():
    assert geometric_checkpoints(1.0, 10.0) == [2.0, 4.0, 8.0, 10.0]
    assert geometric_checkpoints(3.0, 4.0) == [4.0]
    s = make_state(GRID, 0.1, NonlinearityParams(), drho=0.07)
    _, ledger = run(s, 5.0, checkpoints=[2.5, 5.0])
    assert ledger.rho == [1.0, 2.5, 5.0]
    assert ledger.trace_rho[-1] == 5.0


def test_linear_superposition():
    p = NonlinearityParams()
    a = make_state(GRID, 0.2, p)
    b = make_state(GRID, 0.1, p, center=0.2, velocity_amplitude=0.3)
    ab = a.copy()
    ab.v = 2 * a.v - 3 * b.v
    ab.v_dot = 2 * a.v_dot - 3 * b.v_dot
    ra, _ = run(a, 4.0)
    rb, _ = run(b, 4.0)
    rab, _ = run(ab, 4.0)
    assert np.max(np.abs(rab.v - (2 * ra.v - 3 * rb.v))) < 1e-12


def mode_ode(xi, quarter=True):
    q = 0.25 if quarter else 0.0

    def rhs(r, z):
        return [z[1], -(1 + q / r ** 2 + xi ** 2 / r ** 2) * z[0]]
    return rhs


def test_linear_mode_against_ode_integrator():
    k = 3
    xi = GRID.xi[k]
    ref = solve_ivp(mode_ode(xi), (1.0, 6.0), [1.0, 0.0], rtol=1e-12, atol=1e-13).y[:, -1]
    errs = []
    for h in (0.02, 0.01):
        final, _ = run(mode_state(k, h), 6.0)
        errs.append(abs(final.v[GRID.points // 2] - ref[0]))  # y = 0
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


def test_nonlinear_step_against_method_of_lines():
    g = GridSpec(np.pi, 16)
    p = NonlinearityParams(alpha0=1.0, beta0=0.5)
    v0 = 0.3 * np.cos(g.y)
    xi = np.abs(g.xi)
    mask = (np.abs(g.wavenumbers) <= g.points // 3).astype(float)

    def rhs(r, z):
        v, vd = z[:16], z[16:]
        w2 = 1 + 0.25 / r ** 2 + (xi / r) ** 2
        lin = np.fft.ifft(w2 * np.fft.fft(v)).real
        src = np.fft.ifft(mask * np.fft.fft(p.source(v, r, g.y))).real
        return np.concatenate([vd, -lin + src])

    v0 = g.dealias(v0)
    ref = solve_ivp(rhs, (1.0, 3.0), np.concatenate([v0, np.zeros(16)]),
                    rtol=1e-12, atol=1e-13).y[:16, -1]
    errs = []
    for h in (0.02, 0.01):
        s = SimulationState(g, 1.0, v0, np.zeros(16), h, p)
        final, _ = run(s, 3.0)
        errs.append(np.max(np.abs(final.v - ref)))
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)


def test_step_function_matches_run():
    s = make_state(GRID, 0.2, NonlinearityParams(1.0, 0.0))
    one = step(s)
    final, _ = run(s, 1.0 + s.drho, checkpoints=[1.0 + s.drho])
    assert one.rho == pytest.approx(final.rho)
    assert np.allclose(one.v, final.v, atol=1e-14)


def test_sample_slices_land_on_targets():
    s = make_state(GRID, 0.2, NonlinearityParams(0.0, 1.0), drho=0.05)
    targets = [1.5, 2.013, 3.0]
    out = sample_slices(s, targets)
    assert [o.rho for o in out] == targets
    final, _ = run(s, 3.0, checkpoints=[3.0])
    assert np.allclose(out[-1].v, final.v, atol=1e-12)


def test_energy_sign_and_smallness():
    s = make_state(GRID, 0.05, NonlinearityParams(0.0, 1.0, profiles.gaussian()))
    e = energy_e0(s)
    assert e.value > 0 and e.small
    big = make_state(GRID, 5.0, NonlinearityParams(1.0, 0.0))
    assert not energy_e0(big).small


def test_linear_energy_loss_rate():
    s = make_state(GRID, 0.2, NonlinearityParams(), drho=0.01, velocity_amplitude=0.1)
    rho, h = 2.0, 0.01
    lo, mid, hi = sample_slices(s, [rho - h, rho, rho + h])
    fd = (linear_energy(hi) - linear_energy(lo)) / (2 * h)
    assert fd == pytest.approx(linear_energy_loss_rate(mid), rel=1e-3)
    assert linear_energy_loss_rate(mid) < 0


def test_blowup_raises():
    s = make_state(GridSpec(4.0, 64), 20.0, NonlinearityParams(0.0, 5.0), drho=0.05)
    with pytest.raises(NumericalFailure):
        run(s, 50.0)


def test_convergence_order_small_run():
    s = make_state(GridSpec(8.0, 256), 0.3, NonlinearityParams(1.0, 1.0))
    order, e1, e2 = convergence_order(s, 3.0)
    assert order > 1.8 and e2 < e1


def test_monitors():
    s = make_state(GRID, 0.1, NonlinearityParams(0.0, 1.0))
    _, ledger = run(s, 8.0)
    rep = bootstrap_monitor(ledger, 0.1)
    assert rep["exponent"] < 0.1 and rep["within"]
    with pytest.raises(ValueError):
        bootstrap_monitor(ledger, 0.2)
    m = low_frequency_ode_monitor(s, 0.5, 0.05)
    assert m["high_part"] >= 0 and m["h1"] > 0
    with pytest.raises(ValueError):
        low_frequency_ode_monitor(s, 0.8, 0.05)


def test_trig_interpolate():
    g = GridSpec(math.pi, 32)
    f = np.cos(3 * g.y) + 0.5 * np.sin(5 * g.y)
    assert np.allclose(trig_interpolate(f, g, g.y), f)
    pts = np.array([0.123, -2.0, 1.7])
    assert np.allclose(trig_interpolate(f, g, pts), np.cos(3 * pts) + 0.5 * np.sin(5 * pts))
