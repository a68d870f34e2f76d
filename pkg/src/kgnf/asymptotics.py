"""Scattering profiles, the logarithmic phase correction and decay reports.

Phase conventions: at a fixed probe point the solution oscillates like
``A cos(rho + phi(rho))`` and is complexified as ``z = v - i dv/drho = A e^{i(rho + phi)}``.
With a focusing cubic or any quadratic term the frequency softens, so the
measured ``phi`` decreases like ``-c A^2 ln rho`` with
``c = 3/8 beta0 + 5/12 alpha0^2``; ``fit_log_phase`` returns the raw slope
and ``log_phase_coefficient`` converts it to ``c``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .fitting import PowerFit, fit_power_law
from .spectral import GridSpec

# amplitude dip (relative to running mean) that makes unwrapping ambiguous
UNWRAP_DIP = 0.1


class PhaseUnwrapWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AsymptoticProfile:
    """Complex amplitude ``a`` on the hyperbolic y-grid.

    ``u(t, x) ~ rho^{-1/2} (e^{i phase} a(y) + c.c.)`` with ``x / rho = sinh y``.
    """
    y: np.ndarray
    amplitude: np.ndarray
    c_phase: float = 0.0
    source: str = "from_data"

    def __post_init__(self):
        if not np.all(np.isfinite(self.amplitude)):
            raise ValueError("profile amplitude must be finite")
        if self.source not in ("from_data", "fitted"):
            raise ValueError("source must be 'from_data' or 'fitted'")

    def predict(self, rho: float, phase=None) -> np.ndarray:
        """Real leading-order prediction for ``u(rho, y)``; ``phase`` defaults to ``rho``."""
        phase = rho if phase is None else phase
        return 2.0 * (np.exp(1j * phase) * self.amplitude).real / math.sqrt(rho)


def plus_transform(u0_hat, u1_hat, xi):
    """Forward-in-time half of the data: ``(u0_hat - i <xi>^{-1} u1_hat) / 2``."""
    return 0.5 * (u0_hat - 1j * u1_hat / np.sqrt(1.0 + xi * xi))


def free_profile_from_data(u0, u1, grid: GridSpec, y) -> AsymptoticProfile:
    """Free scattering profile of Cartesian data sampled on ``grid``.

    The stationary point of the free evolution at ``(t, x)`` is ``xi = -x/rho = -sinh y``;
    the factor ``e^{i pi/4} / sqrt(2 pi)`` from stationary phase is folded into ``a``.
    """
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    plus = plus_transform(grid.forward(u0), grid.forward(u1), grid.xi)
    y = np.asarray(y, dtype=float)
    xi_star = -np.sinh(y)
    # band-limited evaluation of the transform off the grid frequencies
    x = grid.y
    phases = np.exp(-1j * np.multiply.outer(xi_star, x))
    plus_at = grid.spacing * (phases @ grid.inverse(plus, real=False))
    amp = np.cosh(y) * plus_at * np.exp(1j * math.pi / 4) / math.sqrt(2 * math.pi)
    return AsymptoticProfile(y, amp, 0.0, "from_data")


def delort_phase_coefficient(alpha0: float, beta0: float) -> float:
    return 0.375 * beta0 + (5.0 / 12.0) * alpha0 * alpha0


def local_normal_form(v, v_dot, rho, alpha0: float):
    """Pointwise quadratic normal form ``w = v - a (v^2 + 2 v_dot^2) / 3`` with ``a = alpha0 rho^{-1/2}``.

    This is the zero-frequency limit of the bilinear correction; it removes
    the O(alpha0 A) phase ripple that otherwise biases the log fit.
    """
    v, v_dot, rho = (np.asarray(a, dtype=float) for a in (v, v_dot, rho))
    a = alpha0 / np.sqrt(rho)
    w = v - a * (v * v + 2 * v_dot * v_dot) / 3
    w_dot = v_dot + 2 * a * v * v_dot / 3
    return w, w_dot


@dataclass(frozen=True)
class PhaseFit:
    slope: float
    stderr: float
    ci95: tuple[float, float]
    amplitude_sq: float
    window: tuple[float, float]
    unwrap_flagged: bool

    @property
    def coefficient(self) -> float:
        """Softening coefficient ``-slope / A^2``."""
        return -self.slope / self.amplitude_sq if self.amplitude_sq > 0 else float("nan")


def unwrapped_phase(v, v_dot):
    z = np.asarray(v, dtype=float) - 1j * np.asarray(v_dot, dtype=float)
    return np.unwrap(np.angle(z)), np.abs(z)


def _dip_flag(amp: np.ndarray) -> bool:
    running = np.cumsum(amp) / np.arange(1, amp.size + 1)
    return bool(np.any(amp < UNWRAP_DIP * running))


def fit_log_phase(rho, v, v_dot, window: Sequence[float] = (10.0, 1000.0),
                  reference: Optional[tuple] = None, alpha0: float = 0.0,
                  drift_term: bool = True) -> PhaseFit:
    """Slope of the unwrapped phase against ``ln rho`` at a fixed probe point.

    ``reference`` is an optional ``(v, v_dot)`` series of the free evolution of
    the same data on the same rho samples; its phase replaces ``rho`` as the
    subtracted carrier, which removes the linear dispersive drift. With
    ``drift_term`` a ``1/rho`` column is added to the regression to absorb the
    remaining transient. ``alpha0`` switches on the pointwise normal form.
    """
    rho = np.asarray(rho, dtype=float)
    lo, hi = float(window[0]), float(window[1])
    if hi / lo < 10 - 1e-9:
        raise ValueError("fit window must span at least one decade")
    if np.any(np.diff(rho) <= 0):
        raise ValueError("rho samples must be strictly increasing")
    if alpha0:
        v, v_dot = local_normal_form(v, v_dot, rho, alpha0)
    theta, amp = unwrapped_phase(v, v_dot)
    if reference is not None:
        carrier, _ = unwrapped_phase(*reference)
    else:
        carrier = rho
    sel = (rho >= lo * (1 - 1e-12)) & (rho <= hi * (1 + 1e-12))
    if np.count_nonzero(sel) < 4:
        raise ValueError("fewer than four samples inside the fit window")
    flagged = _dip_flag(amp[sel])
    if flagged:
        warnings.warn("amplitude dips below 10% of its running mean inside the fit window; "
                      "phase unwrapping may be ambiguous", PhaseUnwrapWarning, stacklevel=2)
    r = rho[sel]
    target = (theta - carrier)[sel]
    cols = [np.log(r), np.ones_like(r)]
    if drift_term:
        cols.append(1.0 / r)
    X = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(X, target, rcond=None)
    resid = target - X @ coef
    dof = max(r.size - X.shape[1], 1)
    cov = np.linalg.pinv(X.T @ X) * float(resid @ resid) / dof
    se = float(math.sqrt(max(cov[0, 0], 0.0)))
    half = float(stats.t.ppf(0.975, dof)) * se
    slope = float(coef[0])
    return PhaseFit(slope, se, (slope - half, slope + half), float(np.mean(amp[sel] ** 2)),
                    (lo, hi), flagged)


def log_phase_coefficient(fit: PhaseFit) -> float:
    return fit.coefficient


@dataclass(frozen=True)
class DecayReport:
    rho: np.ndarray
    sup_v: np.ndarray
    sup_u_scaled: np.ndarray
    fit: Optional[PowerFit]
    tail_ratio: float
    growth_ratio: float

    @property
    def exponent(self) -> float:
        return 0.0 if self.fit is None else self.fit.exponent

    def rows(self):
        for r, a, b in zip(self.rho, self.sup_v, self.sup_u_scaled):
            yield {"rho": float(r), "sup_v": float(a), "sup_u_scaled": float(b)}


def decay_rate_report(rho, sup_v, tail_start: float = 10.0, early_end: float = 10.0) -> DecayReport:
    """Decay diagnostics for a series of ``sup_y |v|``.

    ``growth_ratio`` is sup over the whole series divided by sup over
    ``rho <= early_end``; ``tail_ratio`` is sup/inf over ``rho >= tail_start``.
    """
    rho = np.asarray(rho, dtype=float)
    sup_v = np.asarray(sup_v, dtype=float)
    if rho.size == 0:
        raise ValueError("empty series")
    if np.any(np.diff(rho) <= 0):
        raise ValueError("rho must be strictly increasing")
    sup_u_scaled = sup_v * np.sqrt((1.0 + rho) / rho)
    if not np.any(sup_v > 0):
        return DecayReport(rho, sup_v, sup_u_scaled, None, 1.0, 1.0)
    if rho[-1] / rho[0] < 100 * (1 - 1e-12):
        raise ValueError("series must span at least two decades in rho")
    tail = rho >= tail_start
    fit = fit_power_law(rho[tail], sup_v[tail]) if np.count_nonzero(tail) >= 2 else None
    tail_vals = sup_v[tail] if np.any(tail) else sup_v
    tail_ratio = float(np.max(tail_vals) / np.min(tail_vals)) if np.min(tail_vals) > 0 else math.inf
    early = sup_v[rho <= early_end]
    early_sup = float(np.max(early)) if early.size else float(sup_v[0])
    growth = float(np.max(sup_v) / early_sup) if early_sup > 0 else math.inf
    return DecayReport(rho, sup_v, sup_u_scaled, fit, tail_ratio, growth)


def report_from_ledger(ledger, **kw) -> DecayReport:
    """Decay report from a solver ledger, preferring its per-step trace."""
    if len(getattr(ledger, "trace_rho", [])) >= 2:
        rho, sup = ledger.trace_rho, ledger.trace_sup_v
    else:
        rho, sup = ledger.rho, ledger.sup_v
    return decay_rate_report(rho, sup, **kw)
