"""Coefficient profiles for the variable cubic term.

Each profile carries its transform as a callable so that band pieces and
scaled copies can be sampled on any frequency grid. Physical-space values
come from a closed form when one exists and from a tabulated inverse
transform otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.special import eval_hermite, gammaln, loggamma

# table used when a profile is only known through its transform
TABLE_HALF_WIDTH = 4096.0
TABLE_POINTS = 2 ** 17


def _smooth_bump(s, a: float = 4.0):
    """exp(a - a/(1 - s^2)) on |s| < 1, peak value 1.

    Larger ``a`` gives a near-Gaussian core and a faster-decaying inverse transform.
    """
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(a - a / (1.0 - s[inside] ** 2))
    return out


@dataclass
class BetaProfile:
    name: str
    hat: Callable[[np.ndarray], np.ndarray]
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    support_radius: float = 50.0
    params: dict = field(default_factory=dict)
    _derivs: dict = field(default_factory=dict, repr=False)
    _closed_derivs: Optional[Callable] = field(default=None, repr=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.func is not None:
            return self.func(z)
        return self.derivative(z, 0)

    def transform(self, zeta):
        return self.hat(np.asarray(zeta, dtype=float))

    def derivative(self, z, order: int):
        z = np.asarray(z, dtype=float)
        if self._closed_derivs is not None:
            return self._closed_derivs(z, order)
        if order not in self._derivs:
            self._derivs[order] = _tabulate(lambda k: (1j * k) ** order * self.hat(k))
        zmin, zmax, spline = self._derivs[order]
        out = np.zeros_like(z)
        inside = (z >= zmin) & (z <= zmax)
        out[inside] = spline(z[inside])
        return out

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"

    def scaled(self, factor: float) -> "BetaProfile":
        f = self.func
        cd = self._closed_derivs
        return BetaProfile(
            f"{self.name}*{factor:g}", lambda k: factor * self.hat(k),
            None if f is None else (lambda z: factor * f(z)),
            self.support_radius, dict(self.params, scale=factor),
            _closed_derivs=None if cd is None else (lambda z, n: factor * cd(z, n)),
        )

    def translated(self, shift: float) -> "BetaProfile":
        f = self.func
        cd = self._closed_derivs
        return BetaProfile(
            f"{self.name}@{shift:g}", lambda k: np.exp(-1j * k * shift) * self.hat(k),
            None if f is None else (lambda z: f(z - shift)),
            self.support_radius + abs(shift), dict(self.params, shift=shift),
            _closed_derivs=None if cd is None else (lambda z, n: cd(z - shift, n)),
        )


def _tabulate(hat):
    n, half = TABLE_POINTS, TABLE_HALF_WIDTH
    h = 2 * half / n
    k = np.fft.fftfreq(n, 1.0 / n)
    zeta = np.pi * k / half
    shift = np.where(k % 2 == 0, 1.0, -1.0)
    vals = np.fft.ifft(hat(zeta) * shift).real / h
    z = -half + h * np.arange(n)
    return z[0], z[-1], make_interp_spline(z, vals, k=5)


def from_transform(name: str, hat, support_radius: float = 200.0, **params) -> BetaProfile:
    return BetaProfile(name, hat, None, support_radius, params)


def zero() -> BetaProfile:
    return BetaProfile("zero", lambda k: np.zeros_like(np.asarray(k, dtype=float), dtype=complex),
                       lambda z: np.zeros_like(z), 0.0,
                       _closed_derivs=lambda z, n: np.zeros_like(z))


def gaussian(amplitude: float = 1.0) -> BetaProfile:
    """``amplitude * exp(-z^2)``."""
    def derivs(z, n):
        return amplitude * (-1.0) ** n * eval_hermite(n, z) * np.exp(-z * z)
    return BetaProfile(
        "gaussian", lambda k: amplitude * np.sqrt(np.pi) * np.exp(-k * k / 4) + 0j,
        lambda z: amplitude * np.exp(-z * z), 7.0, {"amplitude": amplitude},
        _closed_derivs=derivs,
    )


def gaussian_dd(amplitude: float = 1.0) -> BetaProfile:
    """Second derivative of ``amplitude * exp(-z^2)``; transform vanishes to second order at 0."""
    def derivs(z, n):
        return amplitude * (-1.0) ** n * eval_hermite(n + 2, z) * np.exp(-z * z)
    return BetaProfile(
        "gaussian_dd", lambda k: -amplitude * k * k * np.sqrt(np.pi) * np.exp(-k * k / 4) + 0j,
        lambda z: amplitude * (4 * z * z - 2) * np.exp(-z * z), 8.0, {"amplitude": amplitude},
        _closed_derivs=derivs,
    )


def fourier_bump(support=(0.5, 2.5), amplitude: float = 1.0) -> BetaProfile:
    """Even profile whose transform is a smooth bump on ``a <= |zeta| <= b``."""
    a, b = float(support[0]), float(support[1])
    if not 0 <= a < b:
        raise ValueError("fourier_bump support must satisfy 0 <= a < b")
    c, w = (a + b) / 2, (b - a) / 2

    def hat(k):
        return amplitude * _smooth_bump((np.abs(k) - c) / w) + 0j

    return BetaProfile("fourier_bump", hat, None, 300.0,
                       {"support": [a, b], "amplitude": amplitude})


def sech_pow(p: float = 2.0, amplitude: float = 1.0) -> BetaProfile:
    """``amplitude * sech(z)^p``."""
    if p <= 0:
        raise ValueError("sech power must be positive")

    def hat(k):
        k = np.asarray(k, dtype=float)
        lg = 2 * loggamma((p + 1j * k) / 2).real
        return amplitude * np.exp((p - 1) * np.log(2) + lg - gammaln(p)) + 0j

    def func(z):
        a = np.abs(z)
        # overflow-free sech
        return amplitude * (2.0 * np.exp(-a) / (1.0 + np.exp(-2.0 * a))) ** p

    return BetaProfile("sech_pow", hat, func, 40.0 / p, {"p": p, "amplitude": amplitude})


PRESETS = {
    "zero": zero,
    "gaussian": gaussian,
    "gaussian_dd": gaussian_dd,
    "fourier_bump": fourier_bump,
    "sech_pow": sech_pow,
}


def preset(name: str, **kwargs) -> BetaProfile:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown beta preset {name!r}") from None
    if "support" in kwargs:
        kwargs["support"] = tuple(kwargs["support"])
    return factory(**kwargs)
