"""Compare the numba kernels with the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--samples N] [--slabs S] [--repeat R]

For each kernel prints the best-of-R wall time of both backends, the speed-up
and the largest difference between their outputs relative to the output's
largest magnitude.  The first numba
call (compilation or cache load) is excluded from the timings.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from eitcorr import _kernels
from eitcorr.scenarios import DEFAULT_ETA, DEFAULT_GAMMA, DEFAULT_LENGTH, DEFAULT_RABI


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _maxdiff(a, b):
    if isinstance(a, tuple):
        return max(_maxdiff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))


def cases(n_samples, n_slabs, rng):
    nu = 2 * np.pi * 0.3e6 * rng.standard_normal(n_samples)
    g = DEFAULT_GAMMA
    w = np.full(n_samples, DEFAULT_RABI, dtype=np.complex128)

    def rk4(impl):
        return lambda: impl.rk4_slabs(w.copy(), w.copy(), -nu, -nu, 2 * np.pi * 0.05e6,
                                      g, g, g / 3, 0.5, 0.5, DEFAULT_ETA, DEFAULT_ETA,
                                      DEFAULT_LENGTH / n_slabs, n_slabs, False, False,
                                      _kernels.MODE_FREE, np.zeros((1, 1), np.complex128))

    innov = rng.standard_normal(n_samples)

    def ou(impl):
        return lambda: impl.ou_recursion(0.3, 0.995, innov)

    x = rng.standard_normal(n_samples // 10)
    y = np.roll(x, 3) + 0.5 * rng.standard_normal(x.size)
    lags = np.arange(-500, 501, dtype=np.int64)

    def corr(impl):
        return lambda: impl.overlap_correlation(x, y, lags)

    rows = rng.standard_normal((n_slabs, 4096)) + 0j

    def lowpass(impl):
        return lambda: impl.lowpass_rows(rows, 0.01, rows[:, 0].copy())

    kicks = 0.01 * rng.standard_normal(n_samples)

    def theta(impl):
        return lambda: impl.theta_euler(0.0, 0.5, 1.0, 1e-3, kicks)

    return {
        f"rk4_slabs ({n_samples} samples x {n_slabs} slabs)": rk4,
        f"ou_recursion ({n_samples})": ou,
        f"overlap_correlation ({x.size} samples, {lags.size} lags)": corr,
        f"lowpass_rows ({n_slabs} x 4096)": lowpass,
        f"theta_euler ({n_samples} steps)": theta,
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--slabs", type=int, default=100)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if _kernels.numba_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(1)
    print(f"{'kernel':58s} {'numba s':>10s} {'numpy s':>10s} {'speed-up':>9s} {'rel diff':>11s}")
    for name, make in cases(args.samples, args.slabs, rng).items():
        make(_kernels.numba_impl)()  # compile / load cache
        t_nb, out_nb = _best(make(_kernels.numba_impl), args.repeat)
        t_np, out_np = _best(make(_kernels.numpy_impl), args.repeat)
        print(f"{name:58s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:9.1f} {_maxdiff(out_nb, out_np):11.3e}")


if __name__ == "__main__":
    main()
