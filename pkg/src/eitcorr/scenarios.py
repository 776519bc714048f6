"""In-silico experiments: EIT transmission sweeps, noisy waveforms, G2(0) vs B.

Frequencies are offsets from the centre of the one-photon line, where the
nominal carrier sits.  A magnetic field ``B`` splits the ground sublevels by
``2 pi * zeeman_rate * 1e6 * B`` rad/s: ``omega_cb`` grows by that amount and
the two optical transitions move by half of it in opposite directions.

Laser frequency noise moves both beams together.  At ``B = 0`` the two
one-photon detunings stay equal and the exit intensities move together; with
a Zeeman splitting one beam is pushed toward its resonance while the other is
pushed away, and the intensity fluctuations become anti-correlated.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import NumericalError
from .lambda_medium import LambdaAtomParams
from .laser_noise import NoiseModel, band_limit, derive_seed, generate
from .propagation import (
    RB87_D1_ANGULAR_FREQUENCY,
    MediumConfig,
    coupling_constants,
    propagate_batch,
)
from .signal_analysis import IntensitySeries, g2_zero, resonance_width

__all__ = [
    "ExperimentConfig",
    "SweepResult",
    "zeeman_detuning",
    "sinh_grid",
    "default_config",
    "calibrate_rabi",
    "eit_sweep",
    "synthesize_waveforms",
    "correlation_vs_field",
    "lowpass_rate",
    "DEFAULT_RABI",
    "DEFAULT_TRANSMISSION",
]

TWO_PI = 2.0 * math.pi
ZEEMAN_RATE_MHZ_PER_GAUSS = 0.7

#: Single-beam amplitude attenuation exponent kappa*L of the default cell;
#: intensity transmission exp(-2 kappa L) = exp(-5) ~ 0.7%.
DEFAULT_OPTICAL_DEPTH = 2.5
DEFAULT_LENGTH = 0.075
DEFAULT_GAMMA = TWO_PI * 3.0e6
DEFAULT_ETA = DEFAULT_OPTICAL_DEPTH / DEFAULT_LENGTH * DEFAULT_GAMMA / 0.5

#: Two-beam transmission at B = 0 the default drive is calibrated to.  High
#: enough that halving the Rabi frequency still narrows the window: below
#: about 0.45 the thick medium turns opaque and the window widens again.
DEFAULT_TRANSMISSION = 0.72

#: Input Rabi frequency (rad/s) giving ``DEFAULT_TRANSMISSION`` for the
#: default atom and medium; see ``calibrate_rabi``.
DEFAULT_RABI = 31432177.605220765

_CHUNK = 4096


def zeeman_detuning(b: float, zeeman_rate: float = ZEEMAN_RATE_MHZ_PER_GAUSS) -> float:
    """Ground-state splitting (rad/s) produced by field ``b`` (Gauss)."""
    if not math.isfinite(b):
        raise ValueError("magnetic field must be finite")
    return TWO_PI * zeeman_rate * 1.0e6 * b


def sinh_grid(b_max: float, n: int, stretch: float = 5.0) -> tuple[float, ...]:
    """Symmetric grid on ``[-b_max, b_max]``, dense near zero.

    ``b = b_max sinh(stretch x) / sinh(stretch)`` for ``x`` uniform on
    ``[-1, 1]``; ``stretch -> 0`` gives a uniform grid.
    """
    x = np.linspace(-1.0, 1.0, n)
    if stretch == 0:
        g = b_max * x
    else:
        g = b_max * np.sinh(stretch * x) / math.sinh(stretch)
    g[np.abs(g) < 1e-15 * b_max] = 0.0
    return tuple(float(v) for v in g)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run a sweep.

    ``response_lowpass`` is ``None`` (instantaneous medium), ``"auto"`` (the
    power-broadened ground-coherence rate, see :func:`lowpass_rate`) or a rate
    in rad/s.  ``detector_highpass``/``detector_lowpass`` (Hz) enable the
    optional photodiode band-limit stage.
    """

    atom: LambdaAtomParams = field(default_factory=LambdaAtomParams)
    medium: MediumConfig = field(default_factory=lambda: MediumConfig(
        length=DEFAULT_LENGTH, n_slabs=100, eta_override=(DEFAULT_ETA, DEFAULT_ETA)))
    noise: NoiseModel = field(default_factory=lambda: NoiseModel(
        kind="ou_frequency", linewidth=0.3e6, correlation_time=20e-9, seed=20061017, dt=1e-10))
    rabi_input: float = DEFAULT_RABI
    b_grid: tuple = field(default_factory=lambda: sinh_grid(2.0, 41))
    record_length: float = 10e-6
    sample_dt: float = 1e-10
    zeeman_rate: float = ZEEMAN_RATE_MHZ_PER_GAUSS
    response_lowpass: Union[None, str, float] = None
    waveform_b: float = 0.0
    max_lag: float = 0.5e-6
    power_label_mw: float = 0.5
    detector_highpass: Optional[float] = None
    detector_lowpass: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "b_grid", tuple(float(b) for b in self.b_grid))
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not (math.isfinite(self.rabi_input) and self.rabi_input > 0):
            out.append("rabi_input must be positive")
        if not (self.sample_dt > 0 and self.record_length > 0):
            out.append("record_length and sample_dt must be positive")
        elif self.record_length / self.sample_dt < 1e3 * (1 - 1e-9):
            out.append("record_length / sample_dt must be at least 1000")
        if not self.noise.dt == self.sample_dt:
            out.append("noise dt must equal sample_dt")
        g = np.asarray(self.b_grid)
        if g.size == 0 or not np.all(np.isfinite(g)):
            out.append("b_grid must be non-empty and finite")
        elif np.any(np.diff(g) < 0):
            out.append("b_grid must be sorted")
        if not (math.isfinite(self.zeeman_rate) and self.zeeman_rate > 0):
            out.append("zeeman_rate must be positive")
        lp = self.response_lowpass
        if lp is not None and lp != "auto" and not (
            isinstance(lp, (int, float)) and math.isfinite(lp) and lp > 0
        ):
            out.append("response_lowpass must be None, 'auto' or a positive rate")
        if not self.max_lag >= 0:
            out.append("max_lag must be non-negative")
        for name in ("detector_highpass", "detector_lowpass"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and 0 < v < 0.5 / self.sample_dt):
                out.append(f"{name} must be positive and below the Nyquist frequency")
        return out

    @property
    def n_samples(self) -> int:
        return int(round(self.record_length / self.sample_dt))

    @property
    def zeeman_rate_angular(self) -> float:
        """Zeeman coefficient in rad/s per Gauss."""
        return TWO_PI * self.zeeman_rate * 1.0e6

    def atom_at(self, b: float) -> LambdaAtomParams:
        return self.atom.with_zeeman_shift(zeeman_detuning(b, self.zeeman_rate))

    def eta(self) -> tuple[float, float]:
        return coupling_constants(self.medium, RB87_D1_ANGULAR_FREQUENCY)

    def with_power_scale(self, factor: float) -> "ExperimentConfig":
        """Same experiment with both beam powers multiplied by ``factor``."""
        return replace(self, rabi_input=self.rabi_input * math.sqrt(factor),
                       power_label_mw=self.power_label_mw * factor)


@dataclass
class SweepResult:
    b_values: np.ndarray
    transmission1: np.ndarray
    transmission2: np.ndarray
    g2_zero: Optional[np.ndarray] = None
    widths: dict = field(default_factory=dict)


def default_config(**overrides) -> ExperimentConfig:
    return replace(ExperimentConfig(), **overrides) if overrides else ExperimentConfig()


def _two_beam_transmission(config: ExperimentConfig, atom: LambdaAtomParams, rabi: float):
    o1, o2 = propagate_batch(rabi, rabi, 0.0, atom, config.eta(), config.medium.length,
                             config.medium.n_slabs, literal_rho_ca=config.medium.literal_rho_ca)
    scale = rabi * rabi
    return abs(o1[0]) ** 2 / scale, abs(o2[0]) ** 2 / scale


def calibrate_rabi(config: ExperimentConfig, target: float = DEFAULT_TRANSMISSION) -> float:
    """Input Rabi frequency giving two-beam transmission ``target`` at B = 0."""
    atom = config.atom_at(0.0)

    def f(log_rabi):
        return _two_beam_transmission(config, atom, math.exp(log_rabi))[0] - target

    return math.exp(brentq(f, math.log(TWO_PI * 1e4), math.log(TWO_PI * 1e9), xtol=1e-14))


def eit_sweep(config: ExperimentConfig) -> SweepResult:
    """Noiseless transmission of both beams over ``config.b_grid``."""
    b = np.asarray(config.b_grid)
    t1 = np.empty(b.size)
    t2 = np.empty(b.size)
    for k, bk in enumerate(b):
        try:
            t1[k], t2[k] = _two_beam_transmission(config, config.atom_at(bk), config.rabi_input)
        except NumericalError as exc:
            raise NumericalError(f"propagation failed at B = {bk!r} G: {exc}") from exc
    widths = {}
    if b.size >= 3:
        widths["eit_fwhm"] = resonance_width(b, t1)
        widths["eit_fwhm_beam2"] = resonance_width(b, t2)
    return SweepResult(b, t1, t2, None, widths)


def lowpass_rate(config: ExperimentConfig) -> Optional[float]:
    """Ground-coherence response rate (rad/s), or ``None`` when disabled.

    ``"auto"`` uses ``gamma_cb + |W1|^2/gamma_ab + |W2|^2/gamma_ca`` at the
    input Rabi frequency.
    """
    lp = config.response_lowpass
    if lp is None:
        return None
    if lp == "auto":
        a = config.atom
        r2 = config.rabi_input ** 2
        return a.gamma_cb + r2 / a.gamma_ab + r2 / a.gamma_ca
    return float(lp)


def _propagate_noisy(config: ExperimentConfig, atom, nu):
    eta = config.eta()
    L, n_slabs = config.medium.length, config.medium.n_slabs
    literal = config.medium.literal_rho_ca
    rabi = config.rabi_input
    rate = lowpass_rate(config)
    if rate is None:
        return propagate_batch(rabi, rabi, nu, atom, eta, L, n_slabs, literal_rho_ca=literal)
    alpha = -math.expm1(-rate * config.sample_dt)
    out1 = np.empty(nu.shape[0], dtype=np.complex128)
    out2 = np.empty_like(out1)
    state = None
    for start in range(0, nu.shape[0], _CHUNK):
        chunk = nu[start:start + _CHUNK]
        table = np.zeros((n_slabs, chunk.shape[0]), dtype=np.complex128)
        propagate_batch(rabi, rabi, chunk, atom, eta, L, n_slabs, literal_rho_ca=literal,
                        mode=_kernels.MODE_RECORD, rcb_table=table)
        if state is None:
            state = table[:, 0].copy()
        filtered = _kernels.lowpass_rows(table, alpha, state)
        o1, o2 = propagate_batch(rabi, rabi, chunk, atom, eta, L, n_slabs,
                                 literal_rho_ca=literal, mode=_kernels.MODE_FIXED,
                                 rcb_table=np.ascontiguousarray(filtered))
        out1[start:start + chunk.shape[0]] = o1
        out2[start:start + chunk.shape[0]] = o2
    return out1, out2


def synthesize_waveforms(config: ExperimentConfig, b: float, seed: Optional[int] = None):
    """Exit-intensity fluctuation records of both beams at field ``b``.

    One frequency-noise record drives both beams.  Intensities are in units
    of the input intensity.  ``seed`` overrides ``config.noise.seed``.
    """
    noise = config.noise if seed is None else replace(config.noise, seed=seed)
    n = config.n_samples
    nu = generate(noise, n).values
    try:
        o1, o2 = _propagate_noisy(config, config.atom_at(b), nu)
    except NumericalError as exc:
        bad1 = ~np.isfinite(nu)
        where = int(np.argmax(bad1)) if bad1.any() else "unknown"
        raise NumericalError(f"propagation failed at B = {b!r} G (sample {where}): {exc}") from exc
    scale = config.rabi_input ** 2
    series = []
    for o in (o1, o2):
        intensity = (o.real * o.real + o.imag * o.imag) / scale
        if config.detector_highpass or config.detector_lowpass:
            intensity = band_limit(intensity, config.sample_dt, config.detector_highpass,
                                   config.detector_lowpass)
        series.append(IntensitySeries.from_intensity(intensity, config.sample_dt))
    return series[0], series[1]


def _g2_point(args):
    config, k, b = args
    s1, s2 = synthesize_waveforms(config, b, seed=derive_seed(config.noise.seed, k))
    return g2_zero(s1, s2)


def correlation_vs_field(config: ExperimentConfig, threads: int = 1) -> SweepResult:
    """G2(0) over ``config.b_grid`` plus the EIT sweep at the same power.

    Point ``k`` uses the noise sub-stream ``derive_seed(seed, k)``, so any
    thread count gives identical results.
    """
    b = np.asarray(config.b_grid)
    jobs = [(config, k, float(bk)) for k, bk in enumerate(b)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            g2 = np.array(list(pool.map(_g2_point, jobs)))
    else:
        g2 = np.array([_g2_point(j) for j in jobs])
    result = eit_sweep(config)
    result.g2_zero = g2
    if b.size >= 3:
        corr = resonance_width(b, g2)
        result.widths["corr_fwhm"] = corr
        result.widths["eit_to_corr_ratio"] = result.widths["eit_fwhm"] / corr
    return result
