"""Variable-coefficient cubic normal form.

The cubic source ``rho^{-1} beta(rho y) v^3`` is removed by a correction
``rho^{-1} sum_i f_i(rho y) F_i(v, v_dot)`` built from the monomials
``F_i = v^{3-i} v_dot^i``. Differentiating along free oscillations
(``v_ddot = -v``) maps each monomial to the combinations ``F_i^1`` and
``F_i^2``, and matching coefficients gives two decoupled ODEs in the
combinations ``g0 = 3 f0 + f2`` and ``g2 = f0 - f2``:

    g0'' = -3 beta,        g2'' + 8 g2 = -beta.

Both are solved by division in frequency, which is only possible when the
transform of beta has a double zero at 0 and vanishes at +-sqrt(8). Profiles
concentrated near 0 are handled band by band (``build_w2_zero_resonance``);
profiles concentrated near +-sqrt(8) need the oscillatory parametrix and the
four-coefficient system (``sqrt8_coefficients_from_parametrix``).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import littlewood_paley as lp
from .profiles import BetaProfile, from_transform
from .spectral import GridSpec, derivative_values, h1_norm, linf_norm

SQRT8 = math.sqrt(8.0)
RESONANCE_TOL = 1e-6
# second differences whose Richardson estimate exceeds this share of the residual are flagged
FD_DOMINANCE = 0.5

DEFAULT_Z_GRID = GridSpec(256.0, 8192)

CLASSIFICATIONS = ("non_resonant", "resonant_at_0", "resonant_at_sqrt8", "both")


class ResonanceError(ValueError):
    """The g-system cannot be solved: the transform does not vanish where the symbol does."""


class FiniteDifferenceWarning(UserWarning):
    pass


# ------------------------------------------------------------------ monomials

def _check_index(i: int):
    if int(i) != i or not 0 <= i <= 3:
        raise ValueError(f"monomial index must be in 0..3, got {i!r}")


def eval_F(i: int, v, v_dot):
    """``v^(3-i) v_dot^i``; indices outside 0..3 give zero."""
    v = np.asarray(v)
    if not 0 <= i <= 3:
        return np.zeros_like(v, dtype=np.result_type(v, float))
    return v ** (3 - i) * np.asarray(v_dot) ** i


def eval_F1(i: int, v, v_dot):
    """First derivative of ``F_i`` along ``v_ddot = -v``."""
    _check_index(i)
    return (3 - i) * eval_F(i + 1, v, v_dot) - i * eval_F(i - 1, v, v_dot)


def eval_F2(i: int, v, v_dot):
    """Second derivative of ``F_i`` along ``v_ddot = -v``."""
    _check_index(i)
    return ((3 - i) * (2 - i) * eval_F(i + 2, v, v_dot)
            + i * (i - 1) * eval_F(i - 2, v, v_dot)
            - ((3 - i) * (i + 1) + (4 - i) * i) * eval_F(i, v, v_dot))


# ---------------------------------------------------------- coefficient maps

def f_from_g(g0, g2):
    g0, g2 = np.asarray(g0), np.asarray(g2)
    return (g0 + g2) / 4, (g0 - 3 * g2) / 4


def g_from_f(f0, f2):
    f0, f2 = np.asarray(f0), np.asarray(f2)
    return 3 * f0 + f2, f0 - f2


def f_odd_from_g(g1, g3):
    """Inverse of ``g1 = f1 + 3 f3``, ``g3 = f1 - f3``."""
    g1, g3 = np.asarray(g1), np.asarray(g3)
    return (g1 + 3 * g3) / 4, (g1 - g3) / 4


def g_odd_from_f(f1, f3):
    f1, f3 = np.asarray(f1), np.asarray(f3)
    return f1 + 3 * f3, f1 - f3


# ---------------------------------------------------------------- resonance

@dataclass(frozen=True)
class ResonanceReport:
    hat_at_0: complex
    hat_prime_at_0: complex
    hat_at_sqrt8: complex
    hat_at_minus_sqrt8: complex
    hat_sup: float
    tol: float
    double_zero_at_0: bool
    zero_at_sqrt8: bool

    def __post_init__(self):
        if self.classification not in CLASSIFICATIONS:
            raise AssertionError("inconsistent resonance flags")

    @property
    def classification(self) -> str:
        if self.double_zero_at_0 and self.zero_at_sqrt8:
            return "non_resonant"
        if self.zero_at_sqrt8:
            return "resonant_at_0"
        if self.double_zero_at_0:
            return "resonant_at_sqrt8"
        return "both"


def _hat_sup(beta: BetaProfile, extent: float = 64.0) -> tuple[float, float]:
    # features of width ~1/R in frequency for a profile of spatial radius R
    step = min(0.01, 0.5 / max(beta.support_radius, 1.0))
    zeta = np.arange(-extent, extent + step / 2, step)
    vals = np.abs(beta.transform(zeta))
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"transform of {beta.name!r} is not finite on the sample grid")
    edge = max(vals[0], vals[-1])
    return float(vals.max()), float(edge)


def classify_resonance(beta: BetaProfile, tol: float = RESONANCE_TOL) -> ResonanceReport:
    sup, edge = _hat_sup(beta)
    if sup > 0 and edge > tol * sup:
        raise ValueError(f"transform of {beta.name!r} has not decayed at the sampling edge "
                         f"({edge:.2e} vs sup {sup:.2e}); profile under-resolved")
    h = min(1e-4, 0.01 / max(beta.support_radius, 1.0))
    at = beta.transform(np.array([0.0, -h, h, SQRT8, -SQRT8]))
    prime = (at[2] - at[1]) / (2 * h)
    thr = tol * sup
    dz = abs(at[0]) <= thr and abs(prime) <= thr
    z8 = abs(at[3]) <= thr and abs(at[4]) <= thr
    return ResonanceReport(complex(at[0]), complex(prime), complex(at[3]), complex(at[4]),
                           sup, tol, bool(dz), bool(z8))


# ------------------------------------------------------------------ g-system

def _guarded_divide(num, den, zeta, singular, guard, thr, label):
    near = np.zeros(zeta.shape, dtype=bool)
    for s in singular:
        near |= np.abs(zeta - s) < guard
    bad = near & (np.abs(num) > thr)
    if np.any(bad):
        z = zeta[bad][np.argmax(np.abs(num[bad]))]
        raise ResonanceError(f"{label}: transform does not vanish near zeta={z:.4g} "
                             f"(|hat|={np.abs(num[bad]).max():.3e} > {thr:.3e})")
    out = np.zeros(np.broadcast(num, den).shape, dtype=complex)
    ok = (~near) | (np.abs(den) > 0)
    np.divide(num, den, out=out, where=ok & (den != 0))
    return out


@dataclass(frozen=True)
class NFCoefficients:
    """Coefficient fields of the cubic normal form on a z-grid."""
    grid: GridSpec
    beta_hat: Callable[[np.ndarray], np.ndarray]
    beta_values: np.ndarray
    g0: np.ndarray
    g2: np.ndarray
    tol_abs: float = 0.0

    @property
    def f0(self) -> np.ndarray:
        return f_from_g(self.g0, self.g2)[0]

    @property
    def f2(self) -> np.ndarray:
        return f_from_g(self.g0, self.g2)[1]

    def g0_hat(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        return _safe_ratio(3 * self.beta_hat(zeta), zeta * zeta)

    def g2_hat(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        return _safe_ratio(self.beta_hat(zeta), zeta * zeta - 8.0)

    def f_hats(self, zeta):
        return f_from_g(self.g0_hat(zeta), self.g2_hat(zeta))

    def residuals(self) -> dict:
        """Relative L2 residuals of ``g0'' + 3 beta`` and ``g2'' + 8 g2 + beta``."""
        g = self.grid
        r0 = derivative_values(self.g0, g, 2) + 3 * self.beta_values
        r2 = derivative_values(self.g2, g, 2) + 8 * self.g2 + self.beta_values
        scale = float(np.linalg.norm(self.beta_values))
        if scale == 0:
            return {"g0": float(np.linalg.norm(r0)), "g2": float(np.linalg.norm(r2))}
        return {"g0": float(np.linalg.norm(r0)) / scale, "g2": float(np.linalg.norm(r2)) / scale}


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=complex)
    out = np.zeros(np.broadcast(num, den).shape, dtype=complex)
    np.divide(num, den, out=out, where=np.asarray(den) != 0)
    return out


def solve_g_system(beta: BetaProfile, grid: GridSpec = DEFAULT_Z_GRID,
                   tol: float = RESONANCE_TOL, guard: Optional[float] = None) -> NFCoefficients:
    """Divide by the symbols ``zeta^2`` and ``zeta^2 - 8`` on the grid frequencies.

    ``guard`` (default one frequency spacing) is the distance to a singular
    frequency inside which a non-negligible transform value is a resonance.
    """
    zeta = grid.xi
    bh = np.asarray(beta.transform(zeta), dtype=complex)
    sup, _ = _hat_sup(beta)
    sup = max(sup, float(np.abs(bh).max()))
    thr = tol * sup
    guard = grid.xi[1] if guard is None else guard
    g0h = _guarded_divide(3 * bh, zeta * zeta, zeta, (0.0,), guard, 3 * thr, "zero resonance")
    g2h = _guarded_divide(bh, zeta * zeta - 8.0, zeta, (SQRT8, -SQRT8), guard, thr,
                          "sqrt8 resonance")
    real = _is_hermitian(bh, grid)

    def back(c):
        out = grid.inverse(c)
        return out.real if real else out

    return NFCoefficients(grid, beta.transform, back(bh), back(g0h), back(g2h), thr)


def _is_hermitian(coeffs, grid: GridSpec) -> bool:
    k = grid.wavenumbers
    n = grid.points
    mirror = coeffs[(-k) % n]
    scale = max(float(np.abs(coeffs).max()), 1e-300)
    return bool(np.max(np.abs(mirror - np.conj(coeffs))) <= 1e-12 * scale)


def cancellation_identity_residual(coeffs: NFCoefficients, v, v_dot) -> float:
    """``sum_{i=0,2} (f_i - f_i'') F_i + f_i F_i^2 - beta F_0`` pointwise on the z-grid.

    Returned as sup norm per unit ``sup|beta| * sup|F|``.
    """
    g = coeffs.grid
    v, v_dot = np.asarray(v, dtype=float), np.asarray(v_dot, dtype=float)
    total = -coeffs.beta_values * eval_F(0, v, v_dot)
    for i, f in ((0, coeffs.f0), (2, coeffs.f2)):
        total = total + (f - derivative_values(f, g, 2)) * eval_F(i, v, v_dot) + f * eval_F2(i, v, v_dot)
    amp = max(float(np.max(np.abs(v))), float(np.max(np.abs(v_dot))))
    scale = float(np.max(np.abs(coeffs.beta_values))) * amp ** 3
    return float(np.max(np.abs(total))) / scale if scale > 0 else float(np.max(np.abs(total)))


# -------------------------------------------------------------- dyadic bands

@dataclass(frozen=True)
class BetaBands:
    rho: float
    js: tuple
    beta: BetaProfile

    def band_hat(self, j: int, zeta):
        return lp.band_symbol(2.0 ** j * np.asarray(zeta, dtype=float), 1.0) * self.beta.transform(zeta)

    def low_hat(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        return lp.theta(2.0 ** self.js[-1] * zeta) * self.beta.transform(zeta)

    def high_hat(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        return (1.0 - lp.theta(zeta / 2.0)) * self.beta.transform(zeta)

    def reconstruct_hat(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        out = self.low_hat(zeta) + self.high_hat(zeta)
        for j in self.js:
            out = out + self.band_hat(j, zeta)
        return out

    def band_profile(self, j: int) -> BetaProfile:
        return from_transform(f"{self.beta.name}[j={j}]", lambda k, j=j: self.band_hat(j, k),
                              support_radius=self.beta.support_radius * 2.0 ** j, j=j)


def max_band_index(rho: float) -> int:
    """Largest ``j`` with ``2^j <= rho^{1/2}``."""
    if rho < 1:
        raise ValueError("rho must be >= 1")
    return int(math.floor(0.5 * math.log2(rho) + 1e-12))


def dyadic_beta_bands(beta: BetaProfile, rho: float, j_max: Optional[int] = None) -> BetaBands:
    """Bands ``chi_1(2^j zeta) beta_hat`` for ``0 <= j <= j_max``.

    Together with the low leftover ``theta(2^{j_max} zeta) beta_hat`` and the
    high leftover ``(1 - theta(zeta/2)) beta_hat`` they telescope back to beta.
    """
    j_max = max_band_index(rho) if j_max is None else int(j_max)
    return BetaBands(float(rho), tuple(range(j_max + 1)), beta)


def scaled_field(hat, rho: float, grid: GridSpec, real: bool = True) -> np.ndarray:
    """Samples of ``f(rho y)`` on ``grid`` from the transform ``hat`` of ``f``."""
    vals = grid.inverse(hat(grid.xi / rho) / rho)
    return vals.real if real else vals


def band_norm_ratios(beta: BetaProfile, rho: float, grid: GridSpec) -> dict:
    """Band sizes against their dyadic scalings.

    ``linf``: ``2^j ||beta_j(rho y)||_inf``; ``hdot1``:
    ``||beta_j(rho y)||_{H'^1} / ((rho/2^j)^{1/2} 2^{-j})``.
    """
    bands = dyadic_beta_bands(beta, rho)
    out = {"j": [], "linf": [], "hdot1": []}
    for j in bands.js:
        vals = scaled_field(lambda k: bands.band_hat(j, k), rho, grid)
        dv = derivative_values(vals, grid, 1)
        hd1 = math.sqrt(grid.spacing) * float(np.linalg.norm(dv))
        out["j"].append(j)
        out["linf"].append(2.0 ** j * float(np.max(np.abs(vals))))
        out["hdot1"].append(hd1 / (math.sqrt(rho / 2.0 ** j) / 2.0 ** j))
    return {k: np.asarray(v) for k, v in out.items()}


def f_band_ratios(beta: BetaProfile, rho: float, grid: GridSpec,
                  orders: Sequence[int] = (0, 1, 2), weights: Sequence[int] = (0, 1)) -> dict:
    """``||(rho y)^l f_i[beta_j]^{(k)}(rho y)||_inf * 2^{j(k-l-1)}`` per band (i = 0, 2)."""
    bands = dyadic_beta_bands(beta, rho)
    z = rho * grid.y
    rows = []
    for j in bands.js:
        prof = bands.band_profile(j)
        coeffs = _coefficients_from_hat(prof.transform)
        for i, fh in ((0, coeffs[0]), (2, coeffs[1])):
            for k in orders:
                vals = scaled_field(lambda q, fh=fh, k=k: (1j * q) ** k * fh(q), rho, grid)
                for l in weights:
                    m = float(np.max(np.abs(z ** l * vals)))
                    rows.append((j, i, k, l, m * 2.0 ** (j * (k - l - 1))))
    return {"rows": rows, "max_ratio": max((r[-1] for r in rows), default=0.0)}


def _coefficients_from_hat(hat):
    def g0h(q):
        q = np.asarray(q, dtype=float)
        return _safe_ratio(3 * hat(q), q * q)

    def g2h(q):
        q = np.asarray(q, dtype=float)
        return _safe_ratio(hat(q), q * q - 8.0)

    return (lambda q: f_from_g(g0h(q), g2h(q))[0], lambda q: f_from_g(g0h(q), g2h(q))[1])


# ---------------------------------------------------------------- w2 and E

def cutoff_weight(j: int, rho: float) -> float:
    """``chi_0(2^j / rho^{1/2})``."""
    return float(lp.theta(2.0 ** j / math.sqrt(rho)))


@dataclass
class CubicNF:
    rho: float
    w2: np.ndarray
    pieces: dict = field(default_factory=dict)
    e_cubic: Optional[np.ndarray] = None
    norms: dict = field(default_factory=dict)


def _check_band_guard(beta: BetaProfile, j: int, tol: float):
    # each band must be solvable on its own support
    zeta = np.linspace(-4.0 / 2 ** j, 4.0 / 2 ** j, 4097)
    bh = np.abs(lp.band_symbol(2.0 ** j * zeta, 1.0) * beta.transform(zeta))
    sup, _ = _hat_sup(beta)
    near = np.abs(np.abs(zeta) - SQRT8) < 0.05
    if np.any(bh[near] > tol * sup):
        raise ResonanceError(f"band j={j} meets the sqrt8 resonance")


def build_w2_zero_resonance(w, w_dot, beta: BetaProfile, rho: float, grid: GridSpec,
                            tol: float = RESONANCE_TOL) -> CubicNF:
    """``sum_j chi_0(2^j/rho^{1/2}) rho^{-1} sum_{i=0,2} f_i[beta_j](rho y) F_i(w_j, w_dot_j)``
    with ``w_j = P_{<= rho/2^j} w``."""
    w = np.asarray(w, dtype=float)
    w_dot = np.asarray(w_dot, dtype=float)
    total = np.zeros_like(w)
    pieces = {}
    if beta.is_zero or not np.any(w) and not np.any(w_dot):
        return CubicNF(rho, total, pieces)
    # bands up to the last one with a nonzero cutoff weight
    j_top = int(math.floor(math.log2(2.0 * math.sqrt(rho)) - 1e-12))
    bands = dyadic_beta_bands(beta, rho, j_top)
    for j in bands.js:
        c = cutoff_weight(j, rho)
        if c == 0:
            continue
        _check_band_guard(beta, j, tol)
        f0h, f2h = _coefficients_from_hat(lambda q, j=j: bands.band_hat(j, q))
        f0 = scaled_field(f0h, rho, grid)
        f2 = scaled_field(f2h, rho, grid)
        sym = lp.low_symbol(grid.xi, rho / 2.0 ** j)
        wj = grid.apply_multiplier(w, sym)
        wdj = grid.apply_multiplier(w_dot, sym)
        piece = c * (f0 * eval_F(0, wj, wdj) + f2 * eval_F(2, wj, wdj)) / rho
        pieces[j] = piece
        total += piece
    return CubicNF(rho, total, pieces)


def cubic_source(w, beta: BetaProfile, rho: float, grid: GridSpec, low: bool = True) -> np.ndarray:
    """``rho^{-1} beta(rho y) (P_{<= rho} w)^3`` (or with ``w^3`` when ``low`` is off)."""
    w = np.asarray(w, dtype=float)
    if low:
        w = grid.apply_multiplier(w, lp.low_symbol(grid.xi, rho))
    bvals = scaled_field(beta.transform, rho, grid)
    return bvals * w ** 3 / rho


def cubic_error_residual(slices, rho: float, drho: float, beta: BetaProfile, grid: GridSpec,
                         states=None) -> CubicNF:
    """E_cubic from 3 or 5 consecutive ``(w, w_dot)`` slices centered at ``rho``.

    With 5 slices the second rho-derivative uses the fourth-order stencil and
    the gap to the three-point stencil is reported as ``fd_error``.
    ``states`` optionally supplies the ``(v, v_dot)`` pairs for the
    normalisation; it defaults to the slices themselves.
    """
    if len(slices) not in (3, 5):
        raise ValueError("need 3 or 5 slices")
    c = len(slices) // 2
    rhos = [rho + (i - c) * drho for i in range(len(slices))]
    w2 = [build_w2_zero_resonance(s[0], s[1], beta, r, grid).w2 for s, r in zip(slices, rhos)]
    w, w_dot = (np.asarray(a, dtype=float) for a in slices[c])
    d2_3 = (w2[c + 1] - 2 * w2[c] + w2[c - 1]) / drho ** 2
    if len(slices) == 5:
        d2 = (-w2[0] + 16 * w2[1] - 30 * w2[2] + 16 * w2[3] - w2[4]) / (12 * drho ** 2)
        w2_dot = (w2[0] - 8 * w2[1] + 8 * w2[3] - w2[4]) / (12 * drho)
    else:
        d2 = d2_3
        w2_dot = (w2[2] - w2[0]) / (2 * drho)
    source = cubic_source(w, beta, rho, grid)
    e = d2 - derivative_values(w2[c], grid, 2) / rho ** 2 + w2[c] - source
    e_h1 = h1_norm((grid, e))
    fd_est = h1_norm((grid, d2 - d2_3)) if len(slices) == 5 else None
    if fd_est is not None and fd_est > FD_DOMINANCE * e_h1:
        warnings.warn(f"finite-difference error estimate {fd_est:.3e} exceeds half of "
                      f"||E_cubic||_H1 = {e_h1:.3e} at rho={rho:.4g}",
                      FiniteDifferenceWarning, stacklevel=2)
    v, v_dot = (w, w_dot) if states is None else (np.asarray(a, dtype=float) for a in states)
    pair_b = max(lp.b_infinity_norm_values(v, grid, rho), lp.b_infinity_norm_values(v_dot, grid, rho))
    pair_h1 = h1_norm((grid, v)) + h1_norm((grid, v_dot))
    scaled = rho * e_h1 / (pair_b ** 2 * pair_h1) if pair_b > 0 and pair_h1 > 0 else 0.0
    dyw2 = derivative_values(w2[c], grid, 1) / rho
    size = h1_norm((grid, w2[c])) + h1_norm((grid, w2_dot)) + h1_norm((grid, dyw2))
    amp = max(linf_norm((grid, w)), linf_norm((grid, w_dot)))
    w_h1 = h1_norm((grid, w)) + h1_norm((grid, w_dot))
    size_scaled = rho ** 0.25 * size / (amp ** 2 * w_h1) if amp > 0 and w_h1 > 0 else 0.0
    high = (scaled_field(beta.transform, rho, grid) * w ** 3 / rho) - source
    high_scaled = rho * h1_norm((grid, high)) / (amp ** 2 * w_h1) if amp > 0 and w_h1 > 0 else 0.0
    norms = {"e_cubic_h1": e_h1, "scaled": scaled, "fd_error": fd_est,
             "w2_triple_h1": size, "w2_size_scaled": size_scaled,
             "source_h1": h1_norm((grid, source)), "e_high_h1": h1_norm((grid, high)),
             "e_high_scaled": high_scaled}
    return CubicNF(rho, w2[c], {}, e, norms)


# -------------------------------------------------- sqrt8 branch coefficients

@dataclass(frozen=True)
class OddEvenCoefficients:
    f0: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray

    def as_tuple(self):
        return self.f0, self.f1, self.f2, self.f3


def sqrt8_coefficients_from_parametrix(k1, k3, rho: float) -> OddEvenCoefficients:
    """Real coefficients from the complex kernels ``K1 = (g0 + i g1) e^{i rho}/3``,
    ``K3 = (g2 + i g3) e^{3 i rho}``."""
    a = np.asarray(k1, dtype=complex) * np.exp(-1j * rho)
    b = np.asarray(k3, dtype=complex) * np.exp(-3j * rho)
    g0, g1 = 3 * a.real, 3 * a.imag
    g2, g3 = b.real, b.imag
    f0, f2 = f_from_g(g0, g2)
    f1, f3 = f_odd_from_g(g1, g3)
    return OddEvenCoefficients(f0, f1, f2, f3)


def four_system_residual(coeff_slices: Sequence[OddEvenCoefficients], rho: float, drho: float,
                         beta: BetaProfile, grid: GridSpec) -> list:
    """Residuals of the coupled system for ``f0..f3`` from three rho-slices.

    ``box f0 - 2 f0 - 2 f1' + 2 f2 = beta(rho y)``,
    ``box f1 - 6 f1 + 6 f0' - 4 f2' + 6 f3 = 0``,
    ``box f2 - 6 f2 + 6 f0 + 4 f1' - 6 f3' = 0``,
    ``box f3 - 2 f3 + 2 f1 + 2 f2' = 0``,
    with ``box = d_rho^2 - rho^{-2} d_y^2`` and ``'`` the rho-derivative.
    """
    if len(coeff_slices) != 3:
        raise ValueError("need 3 slices")
    lo, mid, hi = (s.as_tuple() for s in coeff_slices)

    def box(i):
        return ((hi[i] - 2 * mid[i] + lo[i]) / drho ** 2
                - derivative_values(mid[i], grid, 2) / rho ** 2)

    def dr(i):
        return (hi[i] - lo[i]) / (2 * drho)

    f0, f1, f2, f3 = mid
    bvals = scaled_field(beta.transform, rho, grid)
    return [
        box(0) - 2 * f0 - 2 * dr(1) + 2 * f2 - bvals,
        box(1) - 6 * f1 + 6 * dr(0) - 4 * dr(2) + 6 * f3,
        box(2) - 6 * f2 + 6 * f0 + 4 * dr(1) - 6 * dr(3),
        box(3) - 2 * f3 + 2 * f1 + 2 * dr(2),
    ]
