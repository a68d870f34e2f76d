"""Hyperbolic coordinates inside the forward light cone.

``t = rho cosh y``, ``x = rho sinh y`` and the conjugated unknown ``v = rho^{1/2} u``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fitting import fit_power_law
from .profiles import BetaProfile
from .spectral import Field, GridSpec, derivative_values

SUPPORT_TOL = 1e-12


class SupportOverflowWarning(UserWarning):
    pass


@dataclass(frozen=True)
class HyperbolicPoint:
    rho: float
    y: float

    def to_cartesian(self):
        return hyperbolic_to_cartesian(self.rho, self.y)


def cartesian_to_hyperbolic(t, x):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(t <= np.abs(x)):
        raise ValueError("point lies outside the forward light cone (t <= |x|)")
    rho = np.sqrt((t - x) * (t + x))
    y = np.arctanh(x / t)
    if rho.ndim == 0:
        return HyperbolicPoint(float(rho), float(y))
    return rho, y


def hyperbolic_to_cartesian(rho, y):
    return rho * np.cosh(y), rho * np.sinh(y)


def metric_jacobian_error(rho, y) -> float:
    """Max deviation of the pulled-back metric from diag(-1, rho^2)."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    ch, sh = np.cosh(y), np.sinh(y)
    # columns: d/drho, d/dy of (t, x)
    dt = np.stack([ch, rho * sh])
    dx = np.stack([sh, rho * ch])
    g = -dt[:, None] * dt[None, :] + dx[:, None] * dx[None, :]
    target = np.zeros_like(g)
    target[0, 0] = -1.0
    target[1, 1] = rho ** 2
    scale = np.maximum(1.0, rho ** 2 * ch ** 2)
    return float(np.max(np.abs(g - target) / scale))


def conjugate(u: Field, rho: float) -> Field:
    if rho < 1:
        raise ValueError("rho must be >= 1")
    return Field(u.grid, np.sqrt(rho) * u.values, rho)


def unconjugate(v: Field, rho: float) -> Field:
    if rho < 1:
        raise ValueError("rho must be >= 1")
    return Field(v.grid, v.values / np.sqrt(rho), rho)


def _d2_rho(f, rho, h):
    return (-f(rho + 2 * h) + 16 * f(rho + h) - 30 * f(rho)
            + 16 * f(rho - h) - f(rho - 2 * h)) / (12 * h * h)


def _d1_rho(f, rho, h):
    return (-f(rho + 2 * h) + 8 * f(rho + h) - 8 * f(rho - h) + f(rho - 2 * h)) / (12 * h)


def conjugation_identity_residual(u_of_rho, grid: GridSpec, rho: float, h: float = 1e-3):
    """Evaluate both sides of the conjugation identity on ``u(rho, .)``.

    Left: ``rho^{1/2} (d_rho^2 + rho^{-1} d_rho - rho^{-2} d_y^2 + 1) u``.
    Right: ``(d_rho^2 - rho^{-2} d_y^2 + 1/(4 rho^2) + 1)(rho^{1/2} u)``.
    Returns (left, right); rho-derivatives use fourth-order stencils.
    """
    u = u_of_rho(rho)
    lap = derivative_values(u, grid, 2)
    left = np.sqrt(rho) * (_d2_rho(u_of_rho, rho, h) + _d1_rho(u_of_rho, rho, h) / rho
                           - lap / rho ** 2 + u)

    def v_of(r):
        return np.sqrt(r) * u_of_rho(r)

    right = (_d2_rho(v_of, rho, h) - np.sqrt(rho) * lap / rho ** 2
             + (1 + 0.25 / rho ** 2) * np.sqrt(rho) * u)
    return left, right


def _warn_support(beta: BetaProfile, z_edges, what):
    vals = np.abs(beta(np.asarray(z_edges, dtype=float)))
    if np.max(vals) > SUPPORT_TOL:
        warnings.warn(f"{what}: beta is {np.max(vals):.3e} at the grid edge; "
                      "the periodic domain does not cover its support",
                      SupportOverflowWarning, stacklevel=3)


def beta_scaled_field(beta: BetaProfile, rho: float, grid: GridSpec) -> Field:
    """Samples of ``beta(rho y)``."""
    if rho < 1:
        raise ValueError("rho must be >= 1")
    L = grid.half_width
    _warn_support(beta, [-rho * L, rho * L], "beta_scaled_field")
    return Field(grid, beta(rho * grid.y), rho)


def remainder_values(beta: BetaProfile, rho, y):
    return beta(rho * np.sinh(y)) - beta(rho * y)


def remainder_r_beta(beta: BetaProfile, rho: float, grid: GridSpec) -> Field:
    """``beta(rho sinh y) - beta(rho y)`` on the grid."""
    if rho < 1:
        raise ValueError("rho must be >= 1")
    L = grid.half_width
    _warn_support(beta, [-rho * L, rho * L, rho * np.sinh(L), -rho * np.sinh(L)],
                  "remainder_r_beta")
    vals = remainder_values(beta, rho, grid.y)
    vals[np.abs(grid.y) == 0.0] = 0.0
    return Field(grid, vals, rho)


def _remainder_derivative(beta: BetaProfile, rho, y, k, m):
    s, c = np.sinh(y), np.cosh(y)
    d1 = lambda z: beta.derivative(z, 1)
    d2 = lambda z: beta.derivative(z, 2)
    if (k, m) == (0, 0):
        return remainder_values(beta, rho, y)
    if (k, m) == (1, 0):
        return rho * c * d1(rho * s) - rho * d1(rho * y)
    if (k, m) == (0, 1):
        return s * d1(rho * s) - y * d1(rho * y)
    if (k, m) == (1, 1):
        return (c * d1(rho * s) + rho * s * c * d2(rho * s)
                - d1(rho * y) - rho * y * d2(rho * y))
    raise ValueError("only k, m in {0, 1} are supported")


def _weighted_sup(beta: BetaProfile, order_max, weight_power, zmax):
    z = np.linspace(-zmax, zmax, 40001)
    w = (1 + np.abs(z)) ** weight_power
    return sum(float(np.max(np.abs(beta.derivative(z, n)) * w)) for n in range(order_max + 1))


def r_beta_bound_check(beta: BetaProfile, rho_list, ks=(0, 1), ms=(0, 1),
                       y_window: float = 2.0, samples_per_unit: int = 4000):
    """Measured sup of the remainder derivatives over the weighted-derivative bound.

    The right-hand side uses the y = 0 value of the weighted tail sup, so the
    ratios are comparable across rho. Also fits the rho-exponent of sup |R|.
    """
    rho_list = [float(r) for r in rho_list]
    zmax = max(4 * beta.support_radius, 50.0)
    rows = []
    sup00 = []
    for rho in rho_list:
        n = int(2 * y_window * samples_per_unit * max(1.0, rho / 16)) + 1
        y = np.linspace(-y_window, y_window, n)
        for k in ks:
            for m in ms:
                lhs = float(np.max(np.abs(_remainder_derivative(beta, rho, y, k, m))))
                rhs_sup = _weighted_sup(beta, k + 1 + m, 3 + m, zmax)
                rhs = rho ** k / rho ** (2 + m) * rhs_sup
                rows.append({"rho": rho, "k": k, "m": m, "sup": lhs,
                             "ratio": 0.0 if rhs == 0 else lhs / rhs})
                if (k, m) == (0, 0):
                    sup00.append(lhs)
    exponent = None
    if any(s > 0 for s in sup00) and len(rho_list) >= 2:
        exponent = fit_power_law(rho_list, sup00).exponent
    return {"rows": rows, "exponent": exponent}
