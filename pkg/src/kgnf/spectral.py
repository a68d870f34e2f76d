"""Periodic grids, Fourier transforms and spectral derivatives.

Transforms approximate the continuous convention

.. math::

    \\hat f(\\xi) = \\int e^{-i\\xi y} f(y)\\,dy

on the truncated domain ``[-L, L)``. Coefficients are stored in FFT order,
matching ``GridSpec.xi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    half_width: float
    points: int

    def __post_init__(self):
        if self.points < 2 or self.points % 2:
            raise ValueError("point count must be even and >= 2")
        if self.half_width <= 0:
            raise ValueError("half width must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @cached_property
    def y(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer mode indices k in FFT order."""
        return np.fft.fftfreq(self.points, 1.0 / self.points).astype(int)

    @cached_property
    def xi(self) -> np.ndarray:
        return np.pi * self.wavenumbers / self.half_width

    @cached_property
    def _shift(self) -> np.ndarray:
        # e^{i xi_k L} = (-1)^k because the grid starts at -L
        return np.where(self.wavenumbers % 2 == 0, 1.0, -1.0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keep |k| <= N/3."""
        return np.abs(self.wavenumbers) <= self.points // 3

    @property
    def nyquist(self) -> float:
        return np.pi * (self.points // 2) / self.half_width

    # raw array transforms -------------------------------------------------
    def forward(self, values: np.ndarray) -> np.ndarray:
        return self.spacing * self._shift * np.fft.fft(values, axis=-1)

    def inverse(self, coeffs: np.ndarray, real: bool = False) -> np.ndarray:
        out = np.fft.ifft(coeffs * self._shift, axis=-1) / self.spacing
        return out.real if real else out

    def apply_multiplier(self, values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
        out = self.inverse(symbol * self.forward(values))
        return out.real if np.isrealobj(values) and np.isrealobj(symbol) else out

    def dealias(self, values: np.ndarray) -> np.ndarray:
        return self.apply_multiplier(values, self.dealias_mask.astype(float))

    def field(self, values, rho: float = 1.0) -> "Field":
        return Field(self, np.asarray(values), rho)


@dataclass(frozen=True)
class Field:
    grid: GridSpec
    values: np.ndarray
    rho: float = 1.0

    def __post_init__(self):
        if np.shape(self.values) != (self.grid.points,):
            raise ValueError("field length must equal the grid point count")

    @property
    def is_real(self) -> bool:
        return np.isrealobj(self.values)

    def with_values(self, values) -> "Field":
        return Field(self.grid, np.asarray(values), self.rho)


@dataclass(frozen=True)
class SpectralField:
    """Transform coefficients; ``frequencies`` holds the sampled xi (FFT order)."""

    grid: GridSpec
    coefficients: np.ndarray
    frequencies: np.ndarray
    convention: str = "standard"
    rho: float = 1.0
    real_source: bool = field(default=False, compare=False)


def _check_rho(rho):
    if rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")


def dft_forward(f: Field) -> SpectralField:
    return SpectralField(f.grid, f.grid.forward(f.values), f.grid.xi,
                         "standard", f.rho, f.is_real)


def dft_inverse(s: SpectralField) -> Field:
    coeffs = s.coefficients
    if s.convention == "semiclassical":
        coeffs = coeffs / s.rho
    out = s.grid.inverse(coeffs)
    if s.real_source:
        out = out.real
    return Field(s.grid, out, s.rho)


def semiclassical_forward(f: Field, rho: float) -> SpectralField:
    """``rho * fhat(rho * xi)`` sampled at the semiclassical frequencies xi_k / rho."""
    _check_rho(rho)
    g = f.grid
    return SpectralField(g, rho * g.forward(f.values), g.xi / rho,
                         "semiclassical", rho, f.is_real)


def _derivative_symbol(grid: GridSpec, order: int) -> np.ndarray:
    if order not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")
    sym = (1j * grid.xi) ** order
    if order == 1:
        # odd derivative of the Nyquist mode is not representable
        sym = np.where(grid.wavenumbers == -grid.points // 2, 0.0, sym)
    return sym


def derivative_values(values: np.ndarray, grid: GridSpec, order: int = 1) -> np.ndarray:
    out = grid.inverse(_derivative_symbol(grid, order) * grid.forward(values))
    return out.real if np.isrealobj(values) else out


def derivative_y(f: Field, order: int = 1) -> Field:
    return f.with_values(derivative_values(f.values, f.grid, order))


def semiclassical_derivative(f: Field, rho: float, order: int = 1) -> Field:
    """``D_y^k f`` with ``D_y = (i rho)^{-1} d/dy``.

    For real input the first power is purely imaginary, so the result is complex.
    """
    _check_rho(rho)
    d = derivative_values(f.values, f.grid, order)
    return f.with_values(d / (1j * rho) ** order)


def l2_norm(f) -> float:
    grid, vals = _unpack(f)
    return float(np.sqrt(grid.spacing * np.sum(np.abs(vals) ** 2)))


def linf_norm(f) -> float:
    _, vals = _unpack(f)
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def h1_norm(f) -> float:
    """``||f||_{L2} + ||f'||_{L2}``."""
    grid, vals = _unpack(f)
    d = derivative_values(vals, grid, 1)
    return l2_norm((grid, vals)) + l2_norm((grid, d))


def parseval_sides(f: Field) -> tuple[float, float]:
    """Return (||f||^2, (2 pi)^{-1} dxi sum |fhat|^2)."""
    c = f.grid.forward(f.values)
    dxi = np.pi / f.grid.half_width
    return l2_norm(f) ** 2, float(dxi * np.sum(np.abs(c) ** 2) / (2 * np.pi))


def _unpack(f):
    if isinstance(f, Field):
        return f.grid, np.asarray(f.values)
    grid, vals = f
    return grid, np.asarray(vals)
