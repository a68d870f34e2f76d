"""Bilinear semiclassical operators and the quadratic normal form.

A symbol ``b(xi, eta)`` acts on a pair of fields through

    B(u, v)(y) = (4 pi^2)^{-1} iint b(xi/rho, eta/rho) e^{iy(xi+eta)} u_hat(xi) v_hat(eta),

realised on the periodic grid as a double spectral sum binned by output
frequency. The quadratic correction is ``w1 = rho^{-1/2}(B1(v, v) + B2(v_dot, v_dot))``
and the normal-formed unknown is ``w = v + w1``; with the symbols below

    (d_rho^2 + D_y^2 + 1) w1 = -alpha0 rho^{-1/2} v^2 + O(rho^{-1}),

so the measured residual is ``E_quad = (d_rho^2 + D_y^2 + 1) w1 + alpha0 rho^{-1/2} v^2``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from . import littlewood_paley as lp
from .fitting import fit_power_law
from .spectral import GridSpec, derivative_values, h1_norm, l2_norm

# relative spectral energy beyond the grid Nyquist that triggers a warning
OVERFLOW_TOL = 1e-10
# finite-difference error estimate above this fraction of the residual is flagged
FD_DOMINANCE = 0.5


class BandwidthOverflowWarning(UserWarning):
    pass


class FiniteDifferenceWarning(UserWarning):
    pass


def determinant_polynomial(xi, eta):
    """Determinant of the 2x2 symbol system: ``-(4 xi^2 + 4 eta^2 + 4 xi eta + 3)``."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return -(4 * xi * xi + 4 * eta * eta + 4 * xi * eta + 3)


def ellipticity_constant(extent: float = 50.0, points: int = 401) -> float:
    """min |p| / (1 + |xi| + |eta|)^2 on a square grid."""
    s = np.linspace(-extent, extent, points)
    X, Y = np.meshgrid(s, s, indexing="ij")
    return float(np.min(np.abs(determinant_polynomial(X, Y)) / (1 + np.abs(X) + np.abs(Y)) ** 2))


def _fd_partial(func, axis: int, h: float = 1e-5):
    def d(xi, eta):
        if axis == 0:
            return (func(xi + h, eta) - func(xi - h, eta)) / (2 * h)
        return (func(xi, eta + h) - func(xi, eta - h)) / (2 * h)
    return d


@dataclass(frozen=True, eq=False)
class BilinearSymbol:
    """Symbol ``b(xi, eta)`` in semiclassical frequencies, with optional exact partials."""
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "b"
    d_xi: Optional[Callable] = None
    d_eta: Optional[Callable] = None
    vanishes: bool = False
    _partials: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        out = self.func(xi, eta)
        return np.broadcast_to(np.asarray(out, dtype=complex), np.broadcast(xi, eta).shape)

    def partial(self, axis: int) -> "BilinearSymbol":
        # memoized so the per-rho symbol matrix cache sees a stable object
        if axis not in self._partials:
            exact = self.d_xi if axis == 0 else self.d_eta
            fn = exact if exact is not None else _fd_partial(self.func, axis)
            self._partials[axis] = BilinearSymbol(fn, f"d{axis + 1}{self.name}",
                                                  vanishes=self.vanishes)
        return self._partials[axis]

    def scaled(self, c: complex) -> "BilinearSymbol":
        f, dx, de = self.func, self.d_xi, self.d_eta
        return BilinearSymbol(
            lambda a, b: c * f(a, b), f"{c}*{self.name}",
            None if dx is None else (lambda a, b: c * dx(a, b)),
            None if de is None else (lambda a, b: c * de(a, b)),
            self.vanishes or c == 0)

    def on_grid(self, xi_a, xi_b, rho: float) -> np.ndarray:
        return self(np.asarray(xi_a)[:, None] / rho, np.asarray(xi_b)[None, :] / rho)

    def class_norm(self, m_max: int, n_max: int, k_max: int = 8, samples: int = 48) -> float:
        """max over dyadic boxes of sum_{m<=M, n<=N} iint (1+|xi|)^{m-1}(1+|eta|)^{n-1}|d^m d^n b|."""
        return symbol_class_norm(self, m_max, n_max, k_max, samples)

    def operator_constant(self) -> float:
        """||B|| ~ ||B||_{1,1}(1 + ln(||B||_{2,2}/||B||_{1,1}))^2."""
        n11 = self.class_norm(1, 1)
        if n11 == 0:
            return 0.0
        n22 = self.class_norm(2, 2)
        return n11 * (1 + math.log(max(n22 / n11, 1.0))) ** 2

    def symbol_bound(self, order: int = 2, extent: float = 64.0, points: int = 257) -> float:
        """sum_{k+l<=order} sup (1+|xi|)^k (1+|eta|)^l |d^k d^l b| on a grid."""
        s = np.linspace(-extent, extent, points)
        X, Y = np.meshgrid(s, s, indexing="ij")
        total = 0.0
        for k, l, d in _mixed_partials(self, X, Y, order, order, total_max=order):
            total += float(np.max((1 + np.abs(X)) ** k * (1 + np.abs(Y)) ** l * np.abs(d)))
        return total


def _mixed_partials(sym: BilinearSymbol, X, Y, m_max, n_max, total_max=None):
    """Yield (m, n, d^m_xi d^n_eta b) on the meshgrid by repeated np.gradient."""
    base = np.asarray(sym(X, Y))
    dx = X[1, 0] - X[0, 0]
    dy = Y[0, 1] - Y[0, 0]
    rows = [base]
    for _ in range(m_max):
        rows.append(np.gradient(rows[-1], dx, axis=0, edge_order=2))
    for m, row in enumerate(rows):
        cur = row
        for n in range(n_max + 1):
            if total_max is None or m + n <= total_max:
                yield m, n, cur
            cur = np.gradient(cur, dy, axis=1, edge_order=2)


def _box_ranges(k: int):
    if k < 0:
        return [(-4.0, 4.0)]
    lo, hi = 2.0 ** (k - 1), 2.0 ** (k + 1)
    return [(lo, hi), (-hi, -lo)]


def symbol_class_norm(sym: BilinearSymbol, m_max: int, n_max: int,
                      k_max: int = 8, samples: int = 48) -> float:
    if sym.vanishes:
        return 0.0
    boxes = [(-1, -1)] + [(k, l) for k in range(k_max + 1) for l in range(k_max + 1)]
    best = 0.0
    for k, l in boxes:
        total = 0.0
        for xr in _box_ranges(k):
            for yr in _box_ranges(l):
                xs = np.linspace(xr[0], xr[1], samples)
                ys = np.linspace(yr[0], yr[1], samples)
                X, Y = np.meshgrid(xs, ys, indexing="ij")
                for m, n, d in _mixed_partials(sym, X, Y, m_max, n_max):
                    w = (1 + np.abs(X)) ** (m - 1) * (1 + np.abs(Y)) ** (n - 1) * np.abs(d)
                    total += float(np.trapezoid(np.trapezoid(w, ys, axis=1), xs))
        best = max(best, total)
    return best


def constant_symbol(c: complex = 1.0) -> BilinearSymbol:
    return BilinearSymbol(lambda a, b: np.full(np.broadcast(a, b).shape, c, dtype=complex),
                          f"const{c}", lambda a, b: np.zeros(np.broadcast(a, b).shape),
                          lambda a, b: np.zeros(np.broadcast(a, b).shape), c == 0)


@lru_cache(maxsize=32)
def symbol_b1(alpha0: float) -> BilinearSymbol:
    """``alpha0 (1 - 2 xi eta) / p``."""
    def f(x, y):
        return alpha0 * (1 - 2 * x * y) / determinant_polynomial(x, y)

    def fx(x, y):
        p = determinant_polynomial(x, y)
        return alpha0 * (-2 * y * p + (1 - 2 * x * y) * (8 * x + 4 * y)) / (p * p)

    def fy(x, y):
        return fx(y, x)

    return BilinearSymbol(f, "b1", fx, fy, alpha0 == 0)


@lru_cache(maxsize=32)
def symbol_b2(alpha0: float) -> BilinearSymbol:
    """``2 alpha0 / p``."""
    def f(x, y):
        return 2 * alpha0 / determinant_polynomial(x, y)

    def fx(x, y):
        p = determinant_polynomial(x, y)
        return 2 * alpha0 * (8 * x + 4 * y) / (p * p)

    def fy(x, y):
        return fx(y, x)

    return BilinearSymbol(f, "b2", fx, fy, alpha0 == 0)


def symbol_system_residual(alpha0: float, extent: float = 10.0, points: int = 200) -> float:
    """Max residual of the two linear equations the quadratic symbols solve."""
    s = np.linspace(-extent, extent, points)
    X, Y = np.meshgrid(s, s, indexing="ij")
    b1 = symbol_b1(alpha0)(X, Y).real
    b2 = symbol_b2(alpha0)(X, Y).real
    r1 = (-1 + 2 * X * Y) * b1 + 2 * (X * X + 1) * (Y * Y + 1) * b2 + alpha0
    r2 = (-1 + 2 * X * Y) * b2 + 2 * b1
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


# ---------------------------------------------------------------- application

def _active_modes(grid: GridSpec, band: Optional[int]):
    k = grid.wavenumbers.astype(np.int64)
    kmax = grid.points // 2 - 1 if band is None else int(band)
    return np.nonzero(np.abs(k) <= kmax)[0]


@lru_cache(maxsize=12)
def _symbol_matrix(sym: BilinearSymbol, grid: GridSpec, rho: float, band):
    idx = _active_modes(grid, band)
    xi = grid.xi[idx]
    mat = sym.on_grid(xi, xi, rho)
    return idx, mat, _is_real_symbol(mat, sym.on_grid(-xi, -xi, rho))


def clear_symbol_cache():
    _symbol_matrix.cache_clear()


def apply_bilinear_pdo(sym: BilinearSymbol, u, v, rho: float, grid: GridSpec,
                       dealias: bool = True, band: Optional[int] = None,
                       spectrum: bool = False):
    """Double spectral sum of ``B(u, v)`` on ``grid``.

    ``band`` restricts both inputs to ``|k| <= band`` (defaults to all modes
    below Nyquist). The output keeps ``|m| < N/2``; energy beyond that is
    reported through ``BandwidthOverflowWarning``. ``dealias`` then keeps
    ``|m| <= N/3``. Returns real values when both inputs and the symbol are real.
    """
    if rho < 1:
        raise ValueError("rho must be >= 1")
    u = np.asarray(u)
    v = np.asarray(v)
    n = grid.points
    if sym.vanishes:
        out = np.zeros(n, dtype=complex)
        return out if spectrum else (out.real if np.isrealobj(u) and np.isrealobj(v) else out)
    idx, mat, real_out = _symbol_matrix(sym, grid, float(rho), band)
    k = grid.wavenumbers.astype(np.int64)[idx]
    uh = grid.forward(u)[idx]
    vh = grid.forward(v)[idx]
    off = int(np.max(np.abs(k)))
    acc = _kernels.bilinear_accumulate(mat, uh, vh, k + off, k + off, 4 * off + 1)
    acc /= 2 * grid.half_width
    m = np.arange(-2 * off, 2 * off + 1)
    keep = np.abs(m) < n // 2
    lost = float(np.sum(np.abs(acc[~keep]) ** 2))
    total = float(np.sum(np.abs(acc) ** 2))
    if total > 0 and lost > OVERFLOW_TOL * total:
        warnings.warn(f"bilinear output exceeds the grid bandwidth (relative energy "
                      f"{lost / total:.2e} dropped)", BandwidthOverflowWarning, stacklevel=2)
    coeffs = np.zeros(n, dtype=complex)
    coeffs[np.mod(m[keep], n)] = acc[keep]
    if dealias:
        coeffs *= grid.dealias_mask
    if spectrum:
        return coeffs
    out = grid.inverse(coeffs)
    if np.isrealobj(u) and np.isrealobj(v) and real_out:
        return out.real
    return out


def _is_real_symbol(mat, mirrored) -> bool:
    # real and even under (xi, eta) -> (-xi, -eta) gives real output for real input
    tol = 1e-14 * max(np.max(np.abs(mat)), 1e-300)
    return bool(np.max(np.abs(mat.imag)) <= tol and np.max(np.abs(mat - mirrored)) <= tol)


def bilinear_pdo_direct(sym: BilinearSymbol, u, v, rho: float, grid: GridSpec,
                        band: Optional[int] = None) -> np.ndarray:
    """Pointwise evaluation of the double sum at each grid point (O(N^2) per point).

    Reference route: no binning and no FFT of the output.
    """
    idx = _active_modes(grid, band)
    xi = grid.xi[idx]
    uh = grid.forward(np.asarray(u))[idx]
    vh = grid.forward(np.asarray(v))[idx]
    weights = sym.on_grid(xi, xi, rho) * np.multiply.outer(uh, vh) / (2 * grid.half_width) ** 2
    total = xi[:, None] + xi[None, :]
    out = np.empty(grid.points, dtype=complex)
    for j, y in enumerate(grid.y):
        out[j] = np.sum(weights * np.exp(1j * y * total))
    return out


def semiclassical_dy(values, grid: GridSpec, rho: float):
    """``D_y = (i rho)^{-1} d_y``."""
    return derivative_values(np.asarray(values), grid, 1) / (1j * rho)


# ------------------------------------------------------------- checks

def pdo_calculus_check(sym: BilinearSymbol, u_of_rho, v_of_rho, du_of_rho, dv_of_rho,
                       rho: float, grid: GridSpec, h: float = 1e-3, band: Optional[int] = None):
    """Residuals of the D_y Leibniz rule and the rho-derivative rule.

    The rho-derivative of ``B(u(rho), v(rho))`` is a fourth-order centered
    difference that also moves the symbol scaling.
    """
    def B(s, a, b, r):
        return apply_bilinear_pdo(s, a, b, r, grid, dealias=False, band=band)

    u, v = u_of_rho(rho), v_of_rho(rho)
    lhs1 = semiclassical_dy(B(sym, u, v, rho), grid, rho)
    rhs1 = B(sym, semiclassical_dy(u, grid, rho), v, rho) + B(sym, u, semiclassical_dy(v, grid, rho), rho)
    scale1 = max(float(np.max(np.abs(lhs1))), 1e-300)

    def Bt(r):
        return B(sym, u_of_rho(r), v_of_rho(r), r)

    lhs2 = (-Bt(rho + 2 * h) + 8 * Bt(rho + h) - 8 * Bt(rho - h) + Bt(rho - 2 * h)) / (12 * h)
    rhs2 = (B(sym, du_of_rho(rho), v, rho) + B(sym, u, dv_of_rho(rho), rho)
            - B(sym.partial(0), semiclassical_dy(u, grid, rho), v, rho) / rho
            - B(sym.partial(1), u, semiclassical_dy(v, grid, rho), rho) / rho)
    scale2 = max(float(np.max(np.abs(lhs2))), 1e-300)
    return {
        "leib1": float(np.max(np.abs(lhs1 - rhs1))) / scale1,
        "leib2": float(np.max(np.abs(lhs2 - rhs2))) / scale2,
    }


def random_band_limited(grid: GridSpec, rng: np.random.Generator, decay: float = 2.0,
                        kmax: Optional[int] = None, envelope: float = 0.0) -> np.ndarray:
    """Real field with random phases and spectrum ~ (1+|k|)^{-decay} up to ``kmax``."""
    k = grid.wavenumbers
    kmax = grid.points // 4 if kmax is None else kmax
    amp = (1 + np.abs(k)) ** (-decay) * (np.abs(k) <= kmax)
    c = amp * (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size))
    vals = np.fft.ifft(c).real * grid.points
    if envelope > 0:
        vals *= np.exp(-(grid.y / envelope) ** 2)
        vals = grid.apply_multiplier(vals, (np.abs(k) <= kmax).astype(float))
    scale = np.max(np.abs(vals))
    return vals / scale if scale > 0 else vals


def pdo_operator_bound_check(sym: BilinearSymbol, rho: float, grid: GridSpec, trials: int = 50,
                             seed: int = 0, fields: Optional[Sequence] = None):
    """Largest observed ratios for the L^p, H^1 and B-norm operator estimates."""
    rng = np.random.default_rng(seed)
    const = sym.operator_constant()
    worst = {"est1_l2": 0.0, "est1_linf": 0.0, "est3": 0.0, "est5": 0.0}
    used = 0
    pairs = fields if fields is not None else (
        (random_band_limited(grid, rng, decay=rng.uniform(1.0, 3.0), kmax=grid.points // 6),
         random_band_limited(grid, rng, decay=rng.uniform(1.0, 3.0), kmax=grid.points // 6))
        for _ in range(trials))
    for u, v in pairs:
        nu_b = lp.b_infinity_norm_values(u, grid, rho)
        nv_b = lp.b_infinity_norm_values(v, grid, rho)
        if nu_b == 0 or nv_b == 0 or const == 0:
            continue
        used += 1
        out = apply_bilinear_pdo(sym, u, v, rho, grid)
        worst["est1_l2"] = max(worst["est1_l2"],
                               l2_norm((grid, out)) / (const * l2_norm((grid, u)) * nv_b))
        worst["est1_linf"] = max(worst["est1_linf"],
                                 float(np.max(np.abs(out))) / (const * float(np.max(np.abs(u))) * nv_b))
        rhs3 = const * (h1_norm((grid, u)) * nv_b + nu_b * h1_norm((grid, v)))
        worst["est3"] = max(worst["est3"], h1_norm((grid, out)) / rhs3)
        worst["est5"] = max(worst["est5"],
                            lp.b_infinity_norm_values(out, grid, rho) / (const * nu_b * nv_b))
    worst["trials"] = used
    worst["operator_constant"] = const
    return worst


def second_order_vanishing_symbol() -> BilinearSymbol:
    """``xi eta / (1 + xi^2 + eta^2)``: vanishes to second order at the origin."""
    def f(x, y):
        return x * y / (1 + x * x + y * y)

    def fx(x, y):
        d = 1 + x * x + y * y
        return y / d - 2 * x * x * y / (d * d)

    return BilinearSymbol(f, "xy/(1+r2)", fx, lambda x, y: fx(y, x))


def low_frequency_smallness(sym: BilinearSymbol, rhos: Sequence[float], grid: GridSpec,
                            sigma: float = 0.5, trials: int = 20, seed: int = 0):
    """Worst ratio ||P_{<=rho^sigma} B(u,v)||_B / prod(||.||_B + ||.||_H1) per rho, and its rho-exponent."""
    rng = np.random.default_rng(seed)
    kmax = grid.points // 6
    pairs = [(random_band_limited(grid, rng, decay=rng.uniform(1.0, 3.0), kmax=kmax),
              random_band_limited(grid, rng, decay=rng.uniform(1.0, 3.0), kmax=kmax))
             for _ in range(trials)]
    worst = []
    for rho in rhos:
        w = 0.0
        cut = max(rho ** sigma, 1.0)
        for u, v in pairs:
            out = apply_bilinear_pdo(sym, u, v, rho, grid)
            low = grid.apply_multiplier(out, lp.low_symbol(grid.xi, cut))
            den = ((lp.b_infinity_norm_values(u, grid, rho) + h1_norm((grid, u)))
                   * (lp.b_infinity_norm_values(v, grid, rho) + h1_norm((grid, v))))
            w = max(w, lp.b_infinity_norm_values(low, grid, rho) / den)
        worst.append(w)
    exponent = fit_power_law(rhos, worst).exponent if len(rhos) >= 2 else None
    return {"rho": list(map(float, rhos)), "ratio": worst, "exponent": exponent}


def cancellation_residuals(alpha0: float, u, v, rho: float, grid: GridSpec,
                           band: Optional[int] = None):
    """The two operator identities behind the normal form, on arbitrary fields.

    Returns max-norm residuals relative to the scale of the terms.
    """
    b1, b2 = symbol_b1(alpha0), symbol_b2(alpha0)

    def B(s, a, b):
        return apply_bilinear_pdo(s, a, b, rho, grid, dealias=False, band=band)

    def dy(a):
        return semiclassical_dy(a, grid, rho)

    def ell(a):
        return dy(dy(a)) + a

    t1 = [-B(b1, u, v), 2 * B(b1, dy(u), dy(v)), 2 * B(b2, ell(u), ell(v))]
    r1 = sum(t1) + alpha0 * grid.apply_multiplier(u * v, _band_mask(grid, band, 2))
    t2 = [-B(b2, u, v), 2 * B(b2, dy(u), dy(v)), 2 * B(b1, u, v)]
    r2 = sum(t2)
    s1 = max(max(float(np.max(np.abs(t))) for t in t1), 1e-300)
    s2 = max(max(float(np.max(np.abs(t))) for t in t2), 1e-300)
    return float(np.max(np.abs(r1))) / s1, float(np.max(np.abs(r2))) / s2


def _band_mask(grid: GridSpec, band: Optional[int], factor: int):
    k = np.abs(grid.wavenumbers)
    kmax = grid.points // 2 - 1 if band is None else factor * band
    return (k <= kmax).astype(float)


# ---------------------------------------------------------------- normal form

@dataclass
class QuadraticNF:
    rho: float
    w1: np.ndarray
    w1_dot: Optional[np.ndarray]
    e_quad: Optional[np.ndarray] = None
    norms: dict = field(default_factory=dict)


def w1_values(v, v_dot, rho: float, grid: GridSpec, alpha0: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if alpha0 == 0:
        return np.zeros_like(v)
    b1, b2 = symbol_b1(alpha0), symbol_b2(alpha0)
    return (apply_bilinear_pdo(b1, v, v, rho, grid)
            + apply_bilinear_pdo(b2, v_dot, v_dot, rho, grid)) / math.sqrt(rho)


def linear_acceleration(v, rho: float, grid: GridSpec) -> np.ndarray:
    """``rho^{-2} v_yy - (1 + 1/(4 rho^2)) v``."""
    return derivative_values(v, grid, 2) / rho ** 2 - (1 + 0.25 / rho ** 2) * v


def build_w1(v, v_dot, rho: float, grid: GridSpec, alpha0: float,
             v_ddot=None) -> QuadraticNF:
    """Quadratic correction and its rho-derivative.

    ``v_ddot`` defaults to the linear acceleration; the resulting error in
    ``w1_dot`` is cubic in the amplitude.
    """
    v = np.asarray(v, dtype=float)
    v_dot = np.asarray(v_dot, dtype=float)
    w1 = w1_values(v, v_dot, rho, grid, alpha0)
    if alpha0 == 0:
        zero = np.zeros_like(v)
        return QuadraticNF(rho, zero, zero.copy(), None, {"h1_triple": 0.0})
    acc = linear_acceleration(v, rho, grid) if v_ddot is None else np.asarray(v_ddot, dtype=float)
    b1, b2 = symbol_b1(alpha0), symbol_b2(alpha0)

    def B(s, a, b):
        return apply_bilinear_pdo(s, a, b, rho, grid)

    def dy(a):
        return semiclassical_dy(a, grid, rho)

    inner = (2 * B(b1, v_dot, v) + 2 * B(b2, acc, v_dot)
             - (B(b1.partial(0), dy(v), v) + B(b1.partial(1), v, dy(v))) / rho
             - (B(b2.partial(0), dy(v_dot), v_dot) + B(b2.partial(1), v_dot, dy(v_dot))) / rho)
    w1_dot = (inner.real / math.sqrt(rho)) - 0.5 * w1 / rho
    dyw = derivative_values(w1, grid, 1) / rho
    norms = {"h1_triple": h1_norm((grid, w1)) + h1_norm((grid, w1_dot)) + h1_norm((grid, dyw)),
             "h1_w1": h1_norm((grid, w1))}
    return QuadraticNF(rho, w1, w1_dot, None, norms)


def quad_error_residual(slices, rho: float, drho: float, grid: GridSpec, alpha0: float) -> QuadraticNF:
    """E_quad from 3 (or 5) consecutive (v, v_dot) slices centered at ``rho``.

    With 5 slices the step-2h estimate gives a Richardson error bound and a
    ``FiniteDifferenceWarning`` is raised when it exceeds half the residual.
    """
    if len(slices) not in (3, 5):
        raise ValueError("need 3 or 5 slices")
    c = len(slices) // 2
    rhos = [rho + (i - c) * drho for i in range(len(slices))]
    w = [w1_values(s[0], s[1], r, grid, alpha0) for s, r in zip(slices, rhos)]
    v = np.asarray(slices[c][0], dtype=float)

    def residual(step):
        d2 = (w[c + step] - 2 * w[c] + w[c - step]) / (step * drho) ** 2
        return (d2 - derivative_values(w[c], grid, 2) / rho ** 2 + w[c]
                + alpha0 / math.sqrt(rho) * v * v)

    e = residual(1)
    e_h1 = h1_norm((grid, e))
    fd_est = None
    if len(slices) == 5:
        fd_est = h1_norm((grid, (residual(2) - e) / 3.0))
        if fd_est > FD_DOMINANCE * e_h1:
            warnings.warn(f"finite-difference error estimate {fd_est:.3e} exceeds half of "
                          f"||E_quad||_H1 = {e_h1:.3e} at rho={rho:.4g}",
                          FiniteDifferenceWarning, stacklevel=2)
    v_dot = np.asarray(slices[c][1], dtype=float)
    source = alpha0 / math.sqrt(rho) * v * v
    pair_b = max(lp.b_infinity_norm_values(v, grid, rho), lp.b_infinity_norm_values(v_dot, grid, rho))
    pair_h1 = h1_norm((grid, v)) + h1_norm((grid, v_dot))
    scaled = rho * e_h1 / (pair_b ** 2 * pair_h1) if pair_b > 0 and pair_h1 > 0 else 0.0
    norms = {"e_quad_h1": e_h1, "source_h1": h1_norm((grid, source)), "scaled": scaled,
             "fd_error": fd_est, "w1_h1": h1_norm((grid, w[c]))}
    return QuadraticNF(rho, w[c], None, e, norms)
