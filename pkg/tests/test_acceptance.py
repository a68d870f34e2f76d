"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Tolerances are the stated ones; nothing here is loosened to make a run pass.
"""
from __future__ import annotations

import time
import warnings

import numpy as np
import pytest

from kgnf.asymptotics import delort_phase_coefficient, report_from_ledger
from kgnf.coordinates import r_beta_bound_check
from kgnf.cubic import (ResonanceError, classify_resonance, cancellation_identity_residual,
                        cubic_error_residual, eval_F, eval_F1, eval_F2, solve_g_system)
from kgnf.fitting import fit_power_law
from kgnf.harness import config_from_dict, exp_log_phase, exp_lp_properties, split_beta
from kgnf.parametrix import parametrix_residual
from kgnf.profiles import fourier_bump, gaussian, gaussian_dd, preset
from kgnf.quadratic import (cancellation_residuals, low_frequency_smallness,
                            pdo_operator_bound_check, quad_error_residual, random_band_limited,
                            second_order_vanishing_symbol, symbol_b1, symbol_b2,
                            symbol_system_residual, apply_bilinear_pdo, bilinear_pdo_direct)
from kgnf.solver import (NonlinearityParams, convergence_order, cross_validate, make_state, run,
                         sample_slices)
from kgnf.spectral import GridSpec

import oracles

pytestmark = pytest.mark.slow

NF_CHECKPOINTS = (10.0, 20.0, 40.0, 80.0, 150.0, 300.0)
PROPERTY_RHOS = (4.0, 16.0, 64.0, 256.0)


def _slices_at_checkpoints(state, drho, residual):
    """Five slices spaced ``2 drho`` around each checkpoint, fed to ``residual``."""
    rows = []
    h = 2 * drho
    for target in NF_CHECKPOINTS:
        c = 1.0 + round((target - 1.0) / drho) * drho
        rhos = [c + (i - 2) * h for i in range(5)]
        sl = sample_slices(state, rhos)
        state = sl[0]
        rows.append((c, residual([(s.v, s.v_dot) for s in sl], c, h)))
    return rows


def test_criterion_1_decay(criterion_report):
    grid = GridSpec(8.0, 1024)
    cases = {"a": NonlinearityParams(1.0, 1.0),
             "b": NonlinearityParams(1.0, 0.0, fourier_bump())}
    assert classify_resonance(cases["b"].beta).classification == "non_resonant"
    details, ok = [], True
    for label, params in cases.items():
        t0 = time.perf_counter()
        _, ledger = run(make_state(grid, 0.01, params, drho=0.05), 1000.0)
        elapsed = time.perf_counter() - t0
        rep = report_from_ledger(ledger)
        ok &= rep.growth_ratio <= 3.0 and elapsed <= 300.0
        details.append(f"({label}) growth {rep.growth_ratio:.3f} in {elapsed:.0f}s")
    assert criterion_report(1, "sup|v| over [1,1e3] <= 3 x sup over [1,10]", ok, "; ".join(details))


def test_criterion_2_log_phase(criterion_report):
    cases = (("cubic_const", 0.15), ("quadratic", 0.20))
    details, ok = [], True
    for scenario, tol in cases:
        cfg = config_from_dict({"preset": scenario, "grid": {"L": 12.0, "N": 2048},
                                "solver": {"drho": 0.05, "rho_end": 1000.0, "eps": 0.05},
                                "fit": {"window": [10.0, 1000.0]}})
        t0 = time.perf_counter()
        row = exp_log_phase(cfg).rows[0]
        elapsed = time.perf_counter() - t0
        p = cfg["params"]
        target = delort_phase_coefficient(p["alpha0"], p["beta0"])
        rel = abs(row["coefficient"] - target) / target
        ok &= rel <= tol and elapsed <= 600.0
        details.append(f"{scenario} {row['coefficient']:.4f} vs {target:.4f} "
                       f"({100 * rel:.1f}% <= {100 * tol:.0f}%)")
    assert criterion_report(2, "log-phase slope / |a|^2", ok, "; ".join(details))


def test_criterion_3_quadratic_nf(criterion_report):
    grid = GridSpec(8.0, 1024)
    drho = 0.01
    state = make_state(grid, 0.01, NonlinearityParams(1.0, 0.0), drho=drho)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rows = _slices_at_checkpoints(
            state, drho, lambda sl, c, h: quad_error_residual(sl, c, h, grid, 1.0).norms)
    rho = [r for r, _ in rows]
    e_exp = fit_power_law(rho, [n["e_quad_h1"] for _, n in rows]).exponent
    s_exp = fit_power_law(rho, [n["source_h1"] for _, n in rows]).exponent
    ok = e_exp <= -0.85 and abs(s_exp + 0.5) <= 0.1
    assert criterion_report(3, "quadratic NF residual exponent", ok,
                            f"E_quad {e_exp:.3f} (<= -0.85), raw source {s_exp:.3f} (-0.5 +- 0.1)")


def test_criterion_4_cubic_nf_zero_branch(criterion_report):
    grid = GridSpec(8.0, 1024)
    drho = 0.01
    beta = split_beta(gaussian_dd(), 0.15, 0.15).near0
    assert classify_resonance(beta).zero_at_sqrt8
    state = make_state(grid, 0.05, NonlinearityParams(0.0, 0.0, beta), drho=drho)
    rows = _slices_at_checkpoints(
        state, drho, lambda sl, c, h: cubic_error_residual(sl, c, h, beta, grid).norms)
    rho = np.array([r for r, _ in rows])
    e = [n["e_cubic_h1"] for _, n in rows]
    size = np.array([n["w2_size_scaled"] for _, n in rows])
    e_exp = fit_power_law(rho, e).exponent
    tail = rho >= 40.0
    size_slope = fit_power_law(rho[tail], size[tail]).exponent
    ok = e_exp <= -0.85 and bool(np.all(np.isfinite(size))) and size_slope <= 0.1
    assert criterion_report(4, "cubic NF (zero branch)", ok,
                            f"E_cubic exponent {e_exp:.3f} (<= -0.85); scaled w2 ratio "
                            f"{size[tail].min():.2e}..{size[tail].max():.2e}, "
                            f"slope {size_slope:.3f} (<= 0.1)")


def test_criterion_5_g_system(criterion_report):
    candidates = [preset(name) for name in ("zero", "gaussian", "gaussian_dd", "fourier_bump",
                                            "sech_pow")]
    candidates += [fourier_bump(support=s) for s in ((0.3, 1.2), (1.0, 2.5), (3.2, 6.0))]
    worst, names = 0.0, []
    for beta in candidates:
        if classify_resonance(beta).classification != "non_resonant":
            continue
        res = solve_g_system(beta).residuals()
        worst = max(worst, res["g0"], res["g2"])
        names.append(f"{beta.name}{beta.params.get('support', '')}")
    try:
        solve_g_system(gaussian())
        guard = False
    except ResonanceError:
        guard = True
    ok = worst < 1e-10 and guard and len(names) >= 4
    assert criterion_report(5, "g-system residuals", ok,
                            f"max {worst:.2e} (< 1e-10) over {len(names)} non-resonant presets; "
                            f"gaussian guard {'raised' if guard else 'missing'}")


def test_criterion_6_parametrix(criterion_report):
    beta = fourier_bump(support=(1.5, 4.2))
    rhos = (20.0, 30.0, 50.0, 80.0, 120.0, 160.0, 200.0)
    t0 = time.perf_counter()
    k_sup, e_sup = [], []
    for rho in rhos:
        st = parametrix_residual(3, beta, rho, refine=(rho == rhos[-1])).stats
        k_sup.append(st["k_sup"])
        e_sup.append(st["e_sup"])
    elapsed = time.perf_counter() - t0
    variation = max(k_sup) / min(k_sup)
    e_exp = fit_power_law(rhos, e_sup).exponent
    ok = variation < 2.0 and e_exp <= -0.8 and elapsed <= 600.0
    assert criterion_report(6, "parametrix K3", ok,
                            f"sup|chi K3| variation {variation:.3f} (< 2), residual exponent "
                            f"{e_exp:.3f} (<= -0.8), {elapsed:.0f}s")


# Cauchy-Schwarz over the |k| modes of a band [lam, 4 lam] gives sup <= (3/pi + 1/L)^{1/2} lam^{1/2} ||.||_2
BERNSTEIN_BOUND = 1.5
ALGEBRA_BOUND = 2.0
PDO_BOUND = 1.0
SMALLNESS_EXPONENT = -0.4


def test_criterion_7_property_suites(criterion_report, rng):
    trials = 100
    lp_cfg = config_from_dict({"grid": {"L": 8.0, "N": 512}, "fit": {"trials": trials}})
    lp_rows = exp_lp_properties(lp_cfg).rows
    bern = max(max(r["bernstein_l2"], r["bernstein_h1"]) for r in lp_rows)
    alg = max(r["algebra"] for r in lp_rows)

    grid = GridSpec(8.0, 256)
    pdo = 0.0
    for rho in PROPERTY_RHOS:
        for sym in (symbol_b1(1.0), symbol_b2(1.0)):
            w = pdo_operator_bound_check(sym, rho, grid, trials=trials, seed=int(rho))
            assert w["trials"] == trials
            pdo = max(pdo, w["est1_l2"], w["est1_linf"], w["est3"], w["est5"])
    small = low_frequency_smallness(second_order_vanishing_symbol(), PROPERTY_RHOS, grid,
                                    trials=trials)["exponent"]

    small_grid = GridSpec(4.0, 64)
    oracle = 0.0
    for rho in PROPERTY_RHOS:
        u = random_band_limited(small_grid, rng, kmax=15)
        v = random_band_limited(small_grid, rng, kmax=15)
        fast = apply_bilinear_pdo(symbol_b1(1.0), u, v, rho, small_grid, dealias=False)
        slow = bilinear_pdo_direct(symbol_b1(1.0), u, v, rho, small_grid)
        oracle = max(oracle, float(np.max(np.abs(fast - slow)) / np.max(np.abs(slow))))

    ok = (bern <= BERNSTEIN_BOUND and alg <= ALGEBRA_BOUND and pdo <= PDO_BOUND
          and small <= SMALLNESS_EXPONENT and oracle <= 1e-10)
    assert criterion_report(7, "operator/norm property suites", ok,
                            f"Bernstein {bern:.3f} (<= {BERNSTEIN_BOUND}), algebra {alg:.3f} "
                            f"(<= {ALGEBRA_BOUND}), PsiDO {pdo:.2e} (<= {PDO_BOUND}), "
                            f"smallness exponent {small:.2f} (<= {SMALLNESS_EXPONENT}), "
                            f"oracle {oracle:.1e} (<= 1e-10); {trials} trials x 4 rho")


def test_criterion_8_cross_validation(criterion_report):
    mismatch = cross_validate(0.01)["relative_l2"]
    orders = []
    for params in (NonlinearityParams(), NonlinearityParams(1.0, 1.0),
                   NonlinearityParams(1.0, 0.0, fourier_bump())):
        state = make_state(GridSpec(8.0, 512), 0.3, params, drho=0.04)
        orders.append(convergence_order(state, 5.0, 0.04)[0])
    ok = mismatch < 1e-3 and min(orders) >= 1.8
    assert criterion_report(8, "solver cross-validation", ok,
                            f"t=20 relative L2 {mismatch:.2e} (< 1e-3); temporal orders "
                            + ", ".join(f"{o:.2f}" for o in orders) + " (>= 1.8)")


def test_criterion_9_r_beta(criterion_report):
    rhos = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0]
    exps = {}
    for name in ("gaussian", "gaussian_dd", "fourier_bump", "sech_pow"):
        rep = r_beta_bound_check(preset(name), rhos, ks=(0,), ms=(0,))
        exps[name] = rep["exponent"]
    zero = r_beta_bound_check(preset("zero"), rhos, ks=(0,), ms=(0,))
    ok = max(exps.values()) <= -1.8 and all(r["sup"] == 0 for r in zero["rows"])
    assert criterion_report(9, "R_beta decay", ok,
                            ", ".join(f"{k} {v:.3f}" for k, v in exps.items()) + " (<= -1.8)")


def test_criterion_10_identities(criterion_report, rng):
    grid = GridSpec(4.0, 64)
    quad = symbol_system_residual(1.0)
    for rho in (1.0, 3.0, 17.0):
        u = random_band_limited(grid, rng, kmax=15)
        v = random_band_limited(grid, rng, kmax=15)
        quad = max(quad, *cancellation_residuals(1.0, u, v, rho, grid, band=15))

    zgrid = GridSpec(256.0, 8192)
    coeff = 0.0
    for beta in (fourier_bump(), fourier_bump(support=(3.2, 6.0))):
        c = solve_g_system(beta, zgrid)
        for _ in range(3):
            v = rng.standard_normal(zgrid.points)
            vd = rng.standard_normal(zgrid.points)
            coeff = max(coeff, cancellation_identity_residual(c, v, vd))

    exact = True
    v = rng.integers(-50, 50, size=200)
    vd = rng.integers(-50, 50, size=200)
    for i in range(4):
        d1 = oracles.poly_derivative(oracles.monomial(i))
        d2 = oracles.poly_derivative(d1)
        exact &= np.array_equal(eval_F1(i, v, vd), oracles.poly_eval(d1, v, vd))
        exact &= np.array_equal(eval_F2(i, v, vd), oracles.poly_eval(d2, v, vd))
        exact &= np.array_equal(eval_F(i, v, vd), v ** (3 - i) * vd ** i)
    ok = quad <= 1e-9 and coeff <= 1e-9 and exact
    assert criterion_report(10, "exact algebraic identities", ok,
                            f"symbol system {quad:.1e}, coefficient level {coeff:.1e} (<= 1e-9); "
                            f"F1/F2 vs substitution {'exact' if exact else 'MISMATCH'}")
