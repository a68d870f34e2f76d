"""Smooth dyadic frequency projections and the log-weighted B-norm."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Field, GridSpec, derivative_values, h1_norm, l2_norm, linf_norm


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)


def smoothstep_prime(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside, 30.0 * t * t * (1.0 - t) ** 2, 0.0)


def theta(r):
    """Base cutoff: 1 for r <= 1, 0 for r >= 2."""
    return smoothstep(2.0 - np.abs(r))


def theta_prime(r):
    return -smoothstep_prime(2.0 - np.abs(r))


def low_symbol(xi, lam):
    return theta(np.abs(xi) / lam)


def band_symbol(xi, lam):
    """Supported in lam <= |xi| <= 4 lam."""
    a = np.abs(xi)
    return theta(a / (2.0 * lam)) - theta(a / lam)


def window(y, inner=1.0, outer=2.0):
    """Smooth bump, 1 on |y| <= inner and 0 on |y| >= outer."""
    return smoothstep((outer - np.abs(y)) / (outer - inner))


@dataclass(frozen=True)
class ProjectionKey:
    kind: str
    threshold: float

    def __post_init__(self):
        if self.kind not in ("band", "low", "high"):
            raise ValueError(f"unknown projection kind {self.kind!r}")
        if self.threshold < 1:
            raise ValueError("projection threshold must be >= 1")

    def symbol(self, xi):
        if self.kind == "low":
            return low_symbol(xi, self.threshold)
        if self.kind == "high":
            return 1.0 - low_symbol(xi, self.threshold)
        return band_symbol(xi, self.threshold)


def dyadic_ladder(grid: GridSpec) -> list[float]:
    """lam = 1, 2, 4, ... up to a quarter of the Nyquist frequency."""
    out, lam = [], 1.0
    while lam <= grid.nyquist / 4:
        out.append(lam)
        lam *= 2
    return out


def partition(grid: GridSpec) -> list[ProjectionKey]:
    """Keys whose symbols sum to one on the grid: low 1, bands, top remainder."""
    ladder = dyadic_ladder(grid)
    keys = [ProjectionKey("low", 1.0)]
    keys += [ProjectionKey("band", lam) for lam in ladder]
    keys.append(ProjectionKey("high", 2.0 * ladder[-1] if ladder else 1.0))
    return keys


def project_values(values, grid: GridSpec, key: ProjectionKey):
    return grid.apply_multiplier(values, key.symbol(grid.xi))


def project(f: Field, key: ProjectionKey) -> Field:
    return f.with_values(project_values(f.values, f.grid, key))


def bernstein_check(f: Field, lam: float):
    """Ratios of ||P_lam f||_inf to lam^{1/2}||P_lam f||_2 and lam^{-1/2}||P_lam f'||_2.

    Returns None when the band is empty.
    """
    g = f.grid
    pf = project_values(f.values, g, ProjectionKey("band", lam))
    l2 = l2_norm((g, pf))
    if l2 <= 1e-13 * l2_norm(f):
        return None
    dpf = derivative_values(pf, g, 1)
    sup = linf_norm((g, pf))
    return {
        "lam": lam,
        "l2_ratio": sup / (np.sqrt(lam) * l2),
        "h1_ratio": sup / (l2_norm((g, dpf)) / np.sqrt(lam)),
    }


def _b_blocks(grid: GridSpec, rho: float):
    lam = float(rho)
    while lam < grid.nyquist:
        yield lam, max(np.log(lam / rho), 1.0)
        lam *= 2


def b_infinity_norm_values(values, grid: GridSpec, rho: float) -> float:
    if rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    coeffs = grid.forward(values)
    xi = grid.xi
    total = np.max(np.abs(grid.inverse(low_symbol(xi, rho) * coeffs)))
    for lam, weight in _b_blocks(grid, rho):
        total += weight * np.max(np.abs(grid.inverse(band_symbol(xi, lam) * coeffs)))
    return float(total)


def b_infinity_norm(f: Field, rho: float) -> float:
    """Low part sup norm plus log-weighted band sup norms above ``rho``."""
    return b_infinity_norm_values(f.values, f.grid, rho)


def b_norm_algebra_check(u: Field, v: Field, rho: float):
    nu, nv = b_infinity_norm(u, rho), b_infinity_norm(v, rho)
    if nu == 0.0 or nv == 0.0:
        return None
    return b_infinity_norm(u.with_values(u.values * v.values), rho) / (nu * nv)


def high_low_split(f: Field, rho: float, sigma: float):
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0, 1)")
    cut = rho ** sigma
    low = f.grid.apply_multiplier(f.values, low_symbol(f.grid.xi, cut))
    high = f.values - low
    h1 = h1_norm(f)
    ratio = None if h1 == 0 else cut ** 0.5 * linf_norm((f.grid, high)) / h1
    return f.with_values(low), f.with_values(high), {"threshold": cut, "ratio": ratio}


def low_pass_rho_derivative(f: Field, rho: float, sigma: float = 1.0, scale: float = 1.0) -> Field:
    """``[d/drho, P_{<= scale rho^sigma}] f = -(sigma/rho) P'_{~ scale rho^sigma} f``.

    The band operator P' has symbol ``theta'(r) r`` with ``r = |xi| / (scale rho^sigma)``.
    """
    r = np.abs(f.grid.xi) / (scale * rho ** sigma)
    sym = -(sigma / rho) * theta_prime(r) * r
    return f.with_values(f.grid.apply_multiplier(f.values, sym))
