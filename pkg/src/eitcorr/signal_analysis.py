"""Normalised intensity cross-correlation, peak/width extraction and spectra.

The cross-correlation at lag ``tau`` is::

    G2(tau) = <dI1(t) dI2(t+tau)> / sqrt(<dI1(t)^2> <dI2(t+tau)^2>)

evaluated on the overlapping part of the two records only (no wraparound,
no zero padding), with both means and both variances recomputed on that
overlap for every lag.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import periodogram

from . import _kernels
from .errors import NumericalError

__all__ = [
    "IntensitySeries",
    "CorrelationCurve",
    "PeakStats",
    "cross_correlation",
    "g2_zero",
    "peak_stats",
    "power_spectrum",
    "resonance_width",
]


@dataclass(frozen=True)
class IntensitySeries:
    dt: float
    mean: float
    fluctuations: np.ndarray

    @classmethod
    def from_intensity(cls, intensity, dt: float) -> "IntensitySeries":
        """Split a raw intensity record into its mean and zero-mean fluctuations."""
        x = np.asarray(intensity, dtype=np.float64)
        if x.size and np.ptp(x) == 0:
            return cls(dt, float(x[0]), np.zeros_like(x))
        mean = float(np.mean(x))
        return cls(dt, mean, x - mean)


@dataclass(frozen=True)
class CorrelationCurve:
    lags: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class PeakStats:
    peak_value: float
    peak_lag: float
    fwhm: float
    background: float


def _lag_count(max_lag: float, dt: float) -> int:
    return int(math.floor(max_lag / dt + 1e-9))


def cross_correlation(s1: IntensitySeries, s2: IntensitySeries, max_lag: float) -> CorrelationCurve:
    """G2 for every lag in ``[-max_lag, max_lag]`` (multiples of ``dt``).

    Raises
    ------
    ValueError
        Mismatched sampling, unequal lengths, or ``max_lag`` above 20% of the
        record.
    NumericalError
        Either overlap window has zero variance.
    """
    if not math.isclose(s1.dt, s2.dt, rel_tol=1e-12):
        raise ValueError("series must share the sample interval")
    x = np.ascontiguousarray(s1.fluctuations, dtype=np.float64)
    y = np.ascontiguousarray(s2.fluctuations, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("series must be one-dimensional and of equal length")
    k = _lag_count(max_lag, s1.dt)
    if k < 0:
        raise ValueError("max_lag must be non-negative")
    if k > 0.2 * x.shape[0]:
        raise ValueError("max_lag exceeds 20% of the record length")
    lags = np.arange(-k, k + 1, dtype=np.int64)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = _kernels.overlap_correlation(x, y, lags)
    if not np.all(np.isfinite(values)):
        bad = lags[~np.isfinite(values)][0]
        raise NumericalError(f"zero variance in the overlap window at lag {bad} samples")
    return CorrelationCurve(lags * s1.dt, values)


def g2_zero(s1: IntensitySeries, s2: IntensitySeries) -> float:
    return float(cross_correlation(s1, s2, 0.0).values[0])


def _outer_median(y: np.ndarray) -> float:
    n = y.shape[0]
    m = max(1, int(round(0.1 * n)))
    return float(np.median(np.concatenate([y[:m], y[-m:]])))


def _half_crossings(x, y, i, half, above):
    """Interpolated positions left/right of index ``i`` where ``y`` crosses ``half``."""

    def inside(v):
        return v > half if above else v < half

    edges = []
    for direction in (-1, 1):
        j = i
        while 0 <= j + direction < len(y) and inside(y[j + direction]):
            j += direction
        nxt = j + direction
        if not 0 <= nxt < len(y):
            return None
        x0, x1, y0, y1 = x[j], x[nxt], y[j], y[nxt]
        edges.append(x0 + (half - y0) * (x1 - x0) / (y1 - y0))
    return edges[1] - edges[0]


def _width_about_extremum(x, y, baseline):
    i = int(np.argmax(np.abs(y - baseline)))
    peak = y[i]
    if peak == baseline:
        return None, i
    half = 0.5 * (peak + baseline)
    return _half_crossings(x, y, i, half, peak > baseline), i


def peak_stats(curve: CorrelationCurve) -> PeakStats:
    """Peak, its lag, FWHM and background of a correlation curve.

    The background is the median of the outermost 20% of lags (10% at each
    end); the peak is the sample of largest magnitude and its width is taken
    at half height between peak and background.
    """
    y = np.asarray(curve.values, dtype=np.float64)
    x = np.asarray(curve.lags, dtype=np.float64)
    if y.size == 0:
        raise ValueError("empty correlation curve")
    if np.ptp(y) == 0:
        raise NumericalError("flat correlation curve has no peak")
    background = _outer_median(y)
    i = int(np.argmax(np.abs(y)))
    half = 0.5 * (y[i] + background)
    width = _half_crossings(x, y, i, half, y[i] > background)
    if width is None:
        raise NumericalError("correlation peak does not return to half height within the lag range")
    return PeakStats(float(y[i]), float(x[i]), float(width), background)


def power_spectrum(s: IntensitySeries, window: str = "hann"):
    """One-sided PSD (units^2/Hz) with Hann window by default.

    Density scaling divides by the window energy, so ``sum(psd) * df``
    recovers the variance of the fluctuations.
    """
    x = np.asarray(s.fluctuations, dtype=np.float64)
    if x.shape[0] < 8:
        raise ValueError("need at least 8 samples")
    f, p = periodogram(x, fs=1.0 / s.dt, window=window, detrend="constant",
                       scaling="density", return_onesided=True)
    return f, p


def resonance_width(xs, ys) -> float:
    """FWHM of the dominant extremum of ``ys(xs)`` above the far-wing baseline.

    The baseline is the median of the outer 20% of points.  Works on
    non-uniform grids (linear interpolation between samples).
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise ValueError("xs and ys must be one-dimensional, equal length, >= 3 points")
    width, _ = _width_about_extremum(x, y, _outer_median(y))
    if width is None:
        raise NumericalError("no half-height crossing on one side of the resonance")
    return float(width)
