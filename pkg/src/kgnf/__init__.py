"""Pseudospectral simulation and normal-form analysis for the 1D Klein-Gordon
equation ``u_tt - u_xx + u = alpha0 u^2 + (beta0 + beta(x)) u^3`` in hyperbolic coordinates."""
from ._kernels import HAVE_NUMBA, backend
from .profiles import BetaProfile, preset
from .spectral import Field, GridSpec

__all__ = ["BetaProfile", "Field", "GridSpec", "HAVE_NUMBA", "backend", "preset"]
__version__ = "0.1.0"
