"""Instantaneous-frequency noise of the laser carrier shared by both beams.

Two models are available:

``ou_frequency``
    Stationary Ornstein-Uhlenbeck (Gauss-Markov) frequency deviation with
    RMS ``sigma = 2 pi * linewidth`` (rad/s) and correlation time
    ``correlation_time``.  Sampled with the exact AR(1) discretisation
    ``x[k] = a x[k-1] + sigma sqrt(1 - a^2) e[k]``, ``a = exp(-dt/tau)``, and a
    stationary start, so every sample has variance ``sigma^2``.

``white_phase_diffusion``
    Independent Gaussian frequency samples.  The integrated phase is a random
    walk with ``<dphi^2> = 2 pi * linewidth * dt``, i.e. a Lorentzian line of
    FWHM ``linewidth``.

Random numbers come from numpy's PCG64 generator.  Sub-streams for sweep
points are derived with :func:`derive_seed`, which hashes ``(seed, index)``
through :class:`numpy.random.SeedSequence`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, lfilter

from . import _kernels

__all__ = ["NoiseModel", "FrequencySeries", "generate", "derive_seed", "band_limit"]

KINDS = ("ou_frequency", "white_phase_diffusion")


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "ou_frequency"
    linewidth: float = 0.3e6
    correlation_time: float = 1.0e-6
    seed: int = 0
    dt: float = 1.0e-10

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if self.kind not in KINDS:
            out.append(f"kind must be one of {KINDS}")
        if not (math.isfinite(self.linewidth) and self.linewidth >= 0):
            out.append("linewidth must be non-negative")
        if self.kind == "ou_frequency" and not (
            math.isfinite(self.correlation_time) and self.correlation_time > 0
        ):
            out.append("correlation_time must be positive")
        if not (math.isfinite(self.dt) and self.dt > 0):
            out.append("dt must be positive")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            out.append("seed must be an unsigned 64-bit integer")
        return out

    @property
    def sigma(self) -> float:
        """Stationary RMS frequency deviation (rad/s) of the OU model."""
        return 2.0 * math.pi * self.linewidth


@dataclass(frozen=True)
class FrequencySeries:
    dt: float
    values: np.ndarray


def derive_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for sub-stream ``index`` of ``seed``."""
    ss = np.random.SeedSequence([int(seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def generate(model: NoiseModel, n: int) -> FrequencySeries:
    if n < 1:
        raise ValueError("n must be at least 1")
    if model.linewidth == 0:
        return FrequencySeries(model.dt, np.zeros(n))
    rng = np.random.default_rng(model.seed)
    if model.kind == "white_phase_diffusion":
        std = math.sqrt(2.0 * math.pi * model.linewidth / model.dt)
        return FrequencySeries(model.dt, std * rng.standard_normal(n))
    sigma = model.sigma
    decay = math.exp(-model.dt / model.correlation_time)
    e = rng.standard_normal(n)
    x0 = sigma * e[0]
    innovations = (sigma * math.sqrt(-math.expm1(-2.0 * model.dt / model.correlation_time))) * e
    return FrequencySeries(model.dt, _kernels.ou_recursion(x0, decay, innovations))


def band_limit(x, dt: float, highpass_hz: float | None = None,
               lowpass_hz: float | None = None) -> np.ndarray:
    """First-order high-pass and/or low-pass stage (photodiode/scope model).

    Each stage is a one-pole RC (first-order Butterworth, bilinear
    transform).  ``None`` skips a stage.
    """
    y = np.asarray(x, dtype=np.float64)
    fs = 1.0 / dt
    for cutoff, kind in ((highpass_hz, "highpass"), (lowpass_hz, "lowpass")):
        if cutoff:
            b, a = butter(1, cutoff, btype=kind, fs=fs)
            y = lfilter(b, a, y)
    return y
