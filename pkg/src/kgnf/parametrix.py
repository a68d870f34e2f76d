"""Approximate solutions of ``(box + 1) K_n = e^{i n rho} beta(rho y)``.

``box = d_rho^2 - rho^{-2} d_y^2``. Each y-frequency ``xi`` is integrated
separately with the approximate fundamental solution

    U(rho, s; xi) = sin(psi(rho, s; xi)) / sqrt(xi^2/s^2 + 1),
    psi(rho, s; xi) = int_s^rho sqrt(xi^2/z^2 + 1) dz,

applied to the source at time ``s``, whose y-transform is
``beta_hat(xi/s)/s``. The integral over ``s`` runs from 1 to ``rho`` under the
cutoff ``chi1(s/rho)``, which is 1 on ``[1/4, 2]`` and 0 below ``1/8``.
For ``n = 3`` the phase ``3 s - psi`` is stationary where ``xi/s = sqrt(8)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from . import littlewood_paley as lp
from .profiles import BetaProfile
from .spectral import GridSpec, derivative_values

SQRT8 = math.sqrt(8.0)
# chi1 vanishes below CUT_LO and is 1 above 2 * CUT_LO
CUT_LO = 0.125
PANEL_WIDTH = math.pi / 6
GAUSS_POINTS = 14
REFINE_TOL = 1e-8
MAX_REFINE = 4


class QuadratureError(RuntimeError):
    pass


class FiniteDifferenceWarning(UserWarning):
    pass


def phase_psi(rho, s, xi):
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("s must be positive")
    return _kernels.phase_psi_array(rho, s, xi)


def kernel_u(rho, s, xi):
    s = np.asarray(s, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return np.sin(phase_psi(rho, s, xi)) / np.sqrt(xi * xi / (s * s) + 1.0)


def chi1(r):
    r = np.asarray(r, dtype=float)
    return lp.theta(r / 2.0) * (1.0 - lp.theta(r / CUT_LO))


def s_nodes(rho: float, panel_width: float = PANEL_WIDTH, q: int = GAUSS_POINTS):
    """Composite Gauss-Legendre nodes on ``[1, rho]`` with breaks at the ``chi1`` corners."""
    lo = max(1.0, CUT_LO * rho)
    breaks = sorted({lo, min(max(lo, 2 * CUT_LO * rho), rho), float(rho)})
    x, w = np.polynomial.legendre.leggauss(q)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        m = int(math.ceil((b - a) / panel_width))
        edges = np.linspace(a, b, m + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        half = 0.5 * np.diff(edges)[:, None]
        nodes.append((mid + half * x).ravel())
        weights.append((half * w).ravel())
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def transform_extent(beta: BetaProfile, rel: float = 1e-14, extent: float = 64.0) -> float:
    """Largest ``|zeta|`` where ``|beta_hat|`` exceeds ``rel`` times its sup."""
    if "support" in beta.params:
        return float(beta.params["support"][1])
    zeta = np.linspace(0.0, extent, 64001)
    vals = np.abs(beta.transform(zeta))
    top = vals.max()
    if top == 0:
        return 0.0
    idx = np.nonzero(vals > rel * top)[0]
    return float(zeta[idx[-1]])


def _integrate(n, beta, rho, xi, panel_width):
    s, w = s_nodes(rho, panel_width)
    if s.size == 0:
        return np.zeros(xi.shape, dtype=complex)
    bhat = beta.transform(np.divide.outer(xi, s))
    return _kernels.parametrix_quadrature(xi, s, w, n, rho, bhat, chi1(s / rho))


def kernel_hat(n: int, beta: BetaProfile, rho: float, xi, refine: bool = False,
               panel_width: float = PANEL_WIDTH) -> np.ndarray:
    """``K_n_hat(rho, xi)``; with ``refine`` the panels are halved until the
    relative change drops below ``REFINE_TOL``."""
    xi = np.asarray(xi, dtype=float)
    if n not in (1, 3):
        raise ValueError("n must be 1 or 3")
    out = _integrate(n, beta, rho, xi, panel_width)
    if not refine:
        return out
    for _ in range(MAX_REFINE):
        panel_width /= 2
        finer = _integrate(n, beta, rho, xi, panel_width)
        scale = max(float(np.max(np.abs(finer))), 1e-300)
        change = float(np.max(np.abs(finer - out))) / scale
        out = finer
        if change < REFINE_TOL:
            return out
    raise QuadratureError(f"s-quadrature did not settle at rho={rho:g} (last change {change:.2e})")


def default_grid(rho: float) -> GridSpec:
    return GridSpec(6.0, 4096 if rho <= 60 else 8192)


@dataclass
class ParametrixKernel:
    n: int
    rho: float
    grid: GridSpec
    k_hat: np.ndarray
    residual_hat: Optional[np.ndarray] = None
    stats: dict = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return self.grid.inverse(self.k_hat)

    @property
    def residual(self) -> Optional[np.ndarray]:
        return None if self.residual_hat is None else self.grid.inverse(self.residual_hat)

    @property
    def window(self) -> np.ndarray:
        return lp.window(self.grid.y)

    def windowed_sup(self, values=None) -> float:
        values = self.values if values is None else values
        inside = np.abs(self.grid.y) <= 1.0
        return float(np.max(np.abs(self.window * values)[inside]))

    def peak_frequency(self) -> float:
        """``xi / rho`` at the maximum of ``|K_hat|``."""
        i = int(np.argmax(np.abs(self.k_hat)))
        return float(abs(self.grid.xi[i]) / self.rho)


def _active(beta: BetaProfile, rho: float, grid: GridSpec, margin: float = 0.1):
    return np.abs(grid.xi) <= (transform_extent(beta) + margin) * rho


def build_k(n: int, beta: BetaProfile, rho: float, grid: Optional[GridSpec] = None,
            refine: bool = False) -> ParametrixKernel:
    grid = default_grid(rho) if grid is None else grid
    k_hat = np.zeros(grid.points, dtype=complex)
    if not beta.is_zero:
        act = _active(beta, rho, grid)
        k_hat[act] = kernel_hat(n, beta, rho, grid.xi[act], refine)
    return ParametrixKernel(n, rho, grid, k_hat)


def parametrix_residual(n: int, beta: BetaProfile, rho: float, grid: Optional[GridSpec] = None,
                        drho: float = 1e-3, refine: bool = False) -> ParametrixKernel:
    """``(box + 1) K_n - e^{i n rho} beta(rho y)`` with a centered second rho-difference.

    ``stats`` holds the windowed sups of ``K``, of the residual, the B-norm of
    ``(chi K, D_y chi K, d_rho chi K)`` and a finite-difference error estimate
    from the step ``2 drho``.
    """
    grid = default_grid(rho) if grid is None else grid
    if beta.is_zero:
        zero = np.zeros(grid.points, dtype=complex)
        return ParametrixKernel(n, rho, grid, zero, zero.copy(),
                                {"k_sup": 0.0, "e_sup": 0.0, "b_norm": 0.0, "fd_error": 0.0})
    act = _active(beta, rho, grid)
    xi = grid.xi[act]
    ks = {m: kernel_hat(n, beta, rho + m * drho, xi, refine and m == 0) for m in (-2, -1, 0, 1, 2)}

    def second(step):
        return (ks[step] - 2 * ks[0] + ks[-step]) / (step * drho) ** 2

    source = np.exp(1j * n * rho) * beta.transform(xi / rho) / rho
    e_act = second(1) + (xi * xi / rho ** 2 + 1.0) * ks[0] - source
    k_hat = np.zeros(grid.points, dtype=complex)
    e_hat = np.zeros(grid.points, dtype=complex)
    fd_hat = np.zeros(grid.points, dtype=complex)
    dk_hat = np.zeros(grid.points, dtype=complex)
    k_hat[act], e_hat[act] = ks[0], e_act
    fd_hat[act] = (second(2) - second(1)) / 3.0
    dk_hat[act] = (ks[1] - ks[-1]) / (2 * drho)
    out = ParametrixKernel(n, rho, grid, k_hat, e_hat)
    chi = out.window
    kv = out.values
    b_norm = max(lp.b_infinity_norm_values(chi * kv, grid, rho),
                 lp.b_infinity_norm_values(derivative_values(chi * kv, grid, 1) / rho, grid, rho),
                 lp.b_infinity_norm_values(chi * grid.inverse(dk_hat), grid, rho))
    out.stats = {"k_sup": out.windowed_sup(kv), "e_sup": out.windowed_sup(out.residual),
                 "fd_error": out.windowed_sup(grid.inverse(fd_hat)), "b_norm": b_norm,
                 "peak_frequency": out.peak_frequency()}
    if out.stats["fd_error"] > 0.5 * out.stats["e_sup"]:
        warnings.warn(f"finite-difference error {out.stats['fd_error']:.3e} exceeds half the "
                      f"residual {out.stats['e_sup']:.3e} at rho={rho:g}", FiniteDifferenceWarning,
                      stacklevel=2)
    return out


def stationary_point_location(n: int, beta: BetaProfile, rho: float, xi: float,
                              width: Optional[float] = None) -> float:
    """Centre ``s`` of the Gaussian-windowed s-integral of largest modulus at fixed ``xi``.

    Away from the stationary point the integrand oscillates with rate
    ``|n - omega(s)|`` and the windowed integral cancels; ``xi / s`` at the
    returned point should be close to ``sqrt(n^2 - 1)``.
    """
    s, w = s_nodes(rho, PANEL_WIDTH / 2)
    bhat = beta.transform(xi / s)
    om = np.sqrt(xi * xi / (s * s) + 1.0)
    integrand = (np.sin(phase_psi(rho, s, xi)) / om * np.exp(1j * n * s)
                 * bhat / s * chi1(s / rho) * w)
    # stationary zone of the phase n s - psi has width ~ sqrt(s / phase'')
    width = 2.0 * math.sqrt(rho) if width is None else width
    centres = np.linspace(s[0], s[-1], 400)
    mags = np.abs(np.exp(-0.5 * ((s[None, :] - centres[:, None]) / width) ** 2) @ integrand)
    return float(centres[int(np.argmax(mags))])
