"""Time the numba kernels against the numpy fallback on workload-sized inputs.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. The numba column
reads "n/a" when numba is unavailable or KGNF_DISABLE_NUMBA is set.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from kgnf import _kernels
from kgnf.parametrix import chi1, s_nodes
from kgnf.profiles import fourier_bump
from kgnf.quadratic import symbol_b1


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bilinear_case(modes: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    k = np.arange(-modes, modes + 1)
    xi = np.pi * k / 8.0
    sym = symbol_b1(1.0).on_grid(xi, xi, 16.0)
    uh = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)
    vh = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)
    idx = k + modes
    return sym, uh, vh, idx, idx, 4 * modes + 1


def parametrix_case(rho: float, n_xi: int):
    beta = fourier_bump((1.5, 4.2))
    xi = np.linspace(-4.3 * rho, 4.3 * rho, n_xi)
    s, w = s_nodes(rho)
    bhat = beta.transform(np.divide.outer(xi, s))
    return xi, s, w, 3, rho, bhat, chi1(s / rho)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    cases = [
        ("bilinear 257 modes", _kernels.bilinear_accumulate, _kernels.reference_bilinear, bilinear_case(128)),
        ("bilinear 1025 modes", _kernels.bilinear_accumulate, _kernels.reference_bilinear, bilinear_case(512)),
        ("parametrix rho=40", _kernels.parametrix_quadrature, _kernels.reference_parametrix,
         parametrix_case(40.0, 600)),
        ("parametrix rho=200", _kernels.parametrix_quadrature, _kernels.reference_parametrix,
         parametrix_case(200.0, 1200)),
    ]
    print(f"backend: {_kernels.backend()}")
    print(f"{'kernel':<22}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, fast, ref, case in cases:
        expected = ref(*case)
        t_np = best_of(lambda: ref(*case), args.repeat)
        if _kernels.HAVE_NUMBA:
            got = fast(*case)  # first call compiles
            diff = float(np.max(np.abs(got - expected)))
            t_nb = best_of(lambda: fast(*case), args.repeat)
            print(f"{name:<22}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}{diff:>12.2e}")
        else:
            print(f"{name:<22}{t_np:>12.4f}{'n/a':>12}{'n/a':>10}{'n/a':>12}")


if __name__ == "__main__":
    main()
