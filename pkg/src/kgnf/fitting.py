"""Log-log regression helpers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class PowerFit:
    exponent: float
    prefactor: float
    stderr: float
    ci95: tuple[float, float]
    points: int


def fit_power_law(x, y) -> PowerFit:
    """Least-squares fit of ``log y = e log x + c``; zero or negative samples are dropped."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if x.size < 2:
        raise ValueError("need at least two positive samples for a power-law fit")
    if x.size == 2:
        e = np.log(y[1] / y[0]) / np.log(x[1] / x[0])
        return PowerFit(float(e), float(y[0] / x[0] ** e), 0.0, (float(e), float(e)), 2)
    res = stats.linregress(np.log(x), np.log(y))
    t = stats.t.ppf(0.975, x.size - 2)
    half = t * res.stderr
    return PowerFit(float(res.slope), float(np.exp(res.intercept)), float(res.stderr),
                    (float(res.slope - half), float(res.slope + half)), int(x.size))
