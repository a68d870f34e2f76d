"""Hot loops with a numba path and a pure-numpy path.

Set ``KGNF_DISABLE_NUMBA=1`` to force the numpy path (also used when numba
is not importable). Both paths compute the same sums; the tests compare them.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("KGNF_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def _bilinear_numpy(sym, uh, vh, ia, ib, size):
    prod = sym * np.multiply.outer(uh, vh)
    idx = (ia[:, None] + ib[None, :]).ravel()
    re = np.bincount(idx, weights=prod.real.ravel(), minlength=size)
    im = np.bincount(idx, weights=prod.imag.ravel(), minlength=size)
    return re + 1j * im


def _parametrix_numpy(xi, s, w, n, rho, bhat, cut):
    X = xi[:, None]
    S = s[None, :]
    om_s = np.sqrt(X * X / (S * S) + 1.0)
    ph = phase_psi_array(rho, S, X)
    integrand = np.sin(ph) / om_s * np.exp(1j * n * S) * bhat / S * cut[None, :]
    return integrand @ w


def phase_psi_array(rho, s, xi):
    """Closed form of int_s^rho sqrt(xi^2/z^2 + 1) dz (broadcasting)."""
    a = np.abs(np.asarray(xi, dtype=float))
    rr = np.sqrt(rho * rho + a * a)
    rs = np.sqrt(s * s + a * a)
    return rr - rs - a * np.log((a + rr) * s / ((a + rs) * rho))


if HAVE_NUMBA:
    @njit(cache=True)
    def _bilinear_numba(sym, uh, vh, ia, ib, size):
        out = np.zeros(size, dtype=np.complex128)
        for k in range(uh.shape[0]):
            uk = uh[k]
            if uk == 0:
                continue
            base = ia[k]
            for l in range(vh.shape[0]):
                out[base + ib[l]] += sym[k, l] * uk * vh[l]
        return out

    @njit(cache=True)
    def _parametrix_numba(xi, s, w, n, rho, bhat, cut):
        out = np.zeros(xi.shape[0], dtype=np.complex128)
        for i in range(xi.shape[0]):
            a = abs(xi[i])
            rr = np.sqrt(rho * rho + a * a)
            acc = 0j
            for j in range(s.shape[0]):
                b = bhat[i, j]
                if b == 0 or cut[j] == 0:
                    continue
                sj = s[j]
                rs = np.sqrt(sj * sj + a * a)
                ph = rr - rs
                if a > 0:
                    ph -= a * np.log((a + rr) * sj / ((a + rs) * rho))
                om = rs / sj
                acc += w[j] * np.sin(ph) / om * np.exp(1j * n * sj) * b / sj * cut[j]
            out[i] = acc
        return out


def bilinear_accumulate(sym, uh, vh, ia, ib, size):
    """``out[ia[k] + ib[l]] += sym[k, l] uh[k] vh[l]``."""
    sym = np.ascontiguousarray(sym, dtype=np.complex128)
    uh = np.ascontiguousarray(uh, dtype=np.complex128)
    vh = np.ascontiguousarray(vh, dtype=np.complex128)
    ia = np.ascontiguousarray(ia, dtype=np.int64)
    ib = np.ascontiguousarray(ib, dtype=np.int64)
    if HAVE_NUMBA:
        return _bilinear_numba(sym, uh, vh, ia, ib, int(size))
    return _bilinear_numpy(sym, uh, vh, ia, ib, int(size))


def parametrix_quadrature(xi, s, w, n, rho, bhat, cut):
    """``sum_j w_j sin(psi)/omega(s_j) e^{i n s_j} bhat[i, j] / s_j cut_j`` for each ``xi_i``."""
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    s = np.ascontiguousarray(s, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    bhat = np.ascontiguousarray(bhat, dtype=np.complex128)
    cut = np.ascontiguousarray(cut, dtype=np.float64)
    if HAVE_NUMBA:
        return _parametrix_numba(xi, s, w, float(n), float(rho), bhat, cut)
    return _parametrix_numpy(xi, s, w, n, rho, bhat, cut)


def reference_bilinear(sym, uh, vh, ia, ib, size):
    """Numpy path regardless of the flag (used by the benchmark and tests)."""
    return _bilinear_numpy(np.asarray(sym, complex), np.asarray(uh, complex),
                           np.asarray(vh, complex), np.asarray(ia), np.asarray(ib), int(size))


def reference_parametrix(xi, s, w, n, rho, bhat, cut):
    return _parametrix_numpy(np.asarray(xi, float), np.asarray(s, float), np.asarray(w, float),
                             n, rho, np.asarray(bhat, complex), np.asarray(cut, float))
