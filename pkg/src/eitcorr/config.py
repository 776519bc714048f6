"""TOML configuration: boundary units in, internal SI/angular units out.

Every scaled quantity is written with its boundary unit in the key name
(``gamma_cb_mhz``, ``length_cm``, ``record_length_us`` ...).  MHz keys for
rates and detunings mean ``2 pi * 1e6`` rad/s; ``linewidth_mhz`` is a plain
frequency (Hz * 1e6).  Each scaled key also accepts an ``_si`` twin
(``gamma_cb_si``) holding the internal value verbatim; :func:`emit_config`
falls back to it only when no boundary-unit float reproduces the internal
value bit-for-bit.  See ``docs/formats.md`` for the full key table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

import tomli
import tomli_w

from .errors import ConfigError
from .lambda_medium import LambdaAtomParams
from .laser_noise import NoiseModel
from .phase_lock import LockParams
from .propagation import MediumConfig
from .scenarios import ExperimentConfig, sinh_grid

__all__ = ["RunConfig", "parse_config", "emit_config", "load_config"]

ANGULAR_MHZ = 2.0 * math.pi * 1.0e6


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    phase_lock: LockParams = field(default_factory=LockParams)

    def with_seed(self, seed: Optional[int]) -> "RunConfig":
        if seed is None:
            return self
        exp = replace(self.experiment, noise=replace(self.experiment.noise, seed=seed))
        return RunConfig(exp, replace(self.phase_lock, seed=seed))


# (toml key, attribute, factor or None for unscaled, kind)
_ATOM = [
    ("gamma_ab_mhz", "gamma_ab", ANGULAR_MHZ, float),
    ("gamma_ca_mhz", "gamma_ca", ANGULAR_MHZ, float),
    ("gamma_cb_mhz", "gamma_cb", ANGULAR_MHZ, float),
    ("omega_ab_mhz", "omega_ab", ANGULAR_MHZ, float),
    ("omega_ac_mhz", "omega_ac", ANGULAR_MHZ, float),
    ("omega_cb_mhz", "omega_cb", ANGULAR_MHZ, float),
    ("n_a", "n_a", None, float),
    ("n_b", "n_b", None, float),
    ("n_c", "n_c", None, float),
    ("conjugate_omega2", "conjugate_omega2", None, bool),
]
_MEDIUM = [
    ("length_cm", "length", 1.0e-2, float),
    ("n_slabs", "n_slabs", None, int),
    ("density_cm3", "density", 1.0e6, float),
    ("dipole_b", "dipole_b", None, float),
    ("dipole_c", "dipole_c", None, float),
    ("literal_rho_ca", "literal_rho_ca", None, bool),
]
_ETA_KEYS = ("eta_b_mhz_per_cm", "eta_c_mhz_per_cm")
_ETA_FACTOR = ANGULAR_MHZ * 100.0
_NOISE = [
    ("kind", "kind", None, str),
    ("linewidth_mhz", "linewidth", 1.0e6, float),
    ("correlation_time_us", "correlation_time", 1.0e-6, float),
    ("seed", "seed", None, int),
]
_EXPERIMENT = [
    ("rabi_mhz", "rabi_input", ANGULAR_MHZ, float),
    ("power_mw", "power_label_mw", None, float),
    ("record_length_us", "record_length", 1.0e-6, float),
    ("sample_dt_us", "sample_dt", 1.0e-6, float),
    ("zeeman_rate_mhz_per_gauss", "zeeman_rate", None, float),
    ("waveform_b_gauss", "waveform_b", None, float),
    ("max_lag_us", "max_lag", 1.0e-6, float),
    ("detector_highpass_mhz", "detector_highpass", 1.0e6, float),
    ("detector_lowpass_mhz", "detector_lowpass", 1.0e6, float),
]
_GRID_KEYS = ("b_grid_gauss", "b_max_gauss", "n_b", "b_stretch")
_LOWPASS_KEYS = ("response_lowpass", "response_lowpass_mhz", "response_lowpass_si")
_PHASE_LOCK = [
    ("a", "a", None, float),
    ("b", "b", None, float),
    ("diffusion", "diffusion", None, float),
    ("theta0", "theta0", None, float),
    ("dt", "dt", None, float),
    ("n_steps", "n_steps", None, int),
    ("seed", "seed", None, int),
]
_SECTIONS = ("atom", "medium", "noise", "experiment", "phase_lock")


def _si_key(key: str) -> str:
    """``gamma_cb_mhz`` -> ``gamma_cb_si``: the same quantity in internal units."""
    return key.rsplit("_", 1)[0] + "_si"


def _coerce(value, kind, path, problems):
    if kind is bool:
        if isinstance(value, bool):
            return value
    elif kind is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif kind is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            v = float(value)
            if math.isfinite(v):
                return v
            problems.append((path, "must be a finite number"))
            return None
    elif kind is str:
        if isinstance(value, str):
            return value
    problems.append((path, f"expected {kind.__name__}, got {type(value).__name__}"))
    return None


def _read_table(section: str, data: dict, table, problems, extra_keys=()):
    """Pull known keys out of ``data``; returns {attribute: internal value}."""
    out = {}
    known = set(extra_keys)
    for key, attr, factor, kind in table:
        known.add(key)
        si = _si_key(key) if factor is not None else None
        if si:
            known.add(si)
        has_key, has_si = key in data, si is not None and si in data
        if has_key and has_si:
            problems.append((f"{section}.{key}", f"conflicts with {section}.{si}"))
            continue
        if has_key:
            v = _coerce(data[key], kind, f"{section}.{key}", problems)
            if v is not None:
                out[attr] = v * factor if factor is not None else v
        elif has_si:
            v = _coerce(data[si], kind, f"{section}.{si}", problems)
            if v is not None:
                out[attr] = v
    for key in data:
        if key not in known:
            problems.append((f"{section}.{key}", "unknown key"))
    return out


def _build(cls, section, kwargs, problems, default):
    try:
        return replace(default, **kwargs) if kwargs else default
    except ValueError as exc:
        for msg in str(exc).split("; "):
            problems.append((f"{section}.{msg.split(' ', 1)[0]}", msg))
    except TypeError as exc:
        problems.append((section, str(exc)))
    return None


def parse_config(text: str) -> RunConfig:
    """Parse TOML text into a validated :class:`RunConfig`.

    Raises
    ------
    ConfigError
        Listing every violation found (unknown keys, wrong types, invariant
        failures), each with its key path.
    """
    problems: list[tuple[str, str]] = []
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError([("<document>", f"malformed TOML: {exc}")]) from exc
    for key in doc:
        if key not in _SECTIONS:
            problems.append((key, "unknown section"))
    sec = {}
    for name in _SECTIONS:
        v = doc.get(name, {})
        if not isinstance(v, dict):
            problems.append((name, "must be a table"))
            v = {}
        sec[name] = v

    defaults = ExperimentConfig()
    atom_kw = _read_table("atom", sec["atom"], _ATOM, problems)
    medium_kw = _read_table("medium", sec["medium"], _MEDIUM, problems,
                            extra_keys=_ETA_KEYS + ("eta_b_si", "eta_c_si"))
    eta = []
    for key, si in zip(_ETA_KEYS, ("eta_b_si", "eta_c_si")):
        m = sec["medium"]
        if key in m and si in m:
            problems.append((f"medium.{key}", f"conflicts with medium.{si}"))
        elif key in m:
            v = _coerce(m[key], float, f"medium.{key}", problems)
            eta.append(None if v is None else v * _ETA_FACTOR)
        elif si in m:
            eta.append(_coerce(m[si], float, f"medium.{si}", problems))
    if len(eta) == 1:
        problems.append(("medium.eta", "give both eta_b and eta_c or neither"))
    elif len(eta) == 2 and None not in eta:
        medium_kw["eta_override"] = (eta[0], eta[1])
    elif not eta and any(k in sec["medium"] for k in ("density_cm3", "density_si", "dipole_b", "dipole_c")):
        # physical coupling requested explicitly: drop the default override
        medium_kw.setdefault("eta_override", None)

    noise_kw = _read_table("noise", sec["noise"], _NOISE, problems)
    exp_kw = _read_table("experiment", sec["experiment"], _EXPERIMENT, problems,
                         extra_keys=_GRID_KEYS + _LOWPASS_KEYS)
    lock_kw = _read_table("phase_lock", sec["phase_lock"], _PHASE_LOCK, problems)

    e = sec["experiment"]
    if "b_grid_gauss" in e:
        if any(k in e for k in _GRID_KEYS[1:]):
            problems.append(("experiment.b_grid_gauss", "conflicts with b_max_gauss/n_b/b_stretch"))
        g = e["b_grid_gauss"]
        if not isinstance(g, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in g
        ):
            problems.append(("experiment.b_grid_gauss", "must be a list of numbers"))
        else:
            exp_kw["b_grid"] = tuple(float(v) for v in g)
    elif any(k in e for k in _GRID_KEYS[1:]):
        b_max = _coerce(e.get("b_max_gauss", 2.0), float, "experiment.b_max_gauss", problems)
        n_b = _coerce(e.get("n_b", 41), int, "experiment.n_b", problems)
        stretch = _coerce(e.get("b_stretch", 5.0), float, "experiment.b_stretch", problems)
        if b_max is not None and b_max <= 0:
            problems.append(("experiment.b_max_gauss", "must be positive"))
        elif n_b is not None and n_b < 1:
            problems.append(("experiment.n_b", "must be at least 1"))
        elif None not in (b_max, n_b, stretch):
            exp_kw["b_grid"] = sinh_grid(b_max, n_b, stretch)

    present = [k for k in _LOWPASS_KEYS if k in e]
    if len(present) > 1:
        problems.append(("experiment.response_lowpass", "give only one of " + ", ".join(present)))
    elif present == ["response_lowpass"]:
        mode = e["response_lowpass"]
        if mode == "off":
            exp_kw["response_lowpass"] = None
        elif mode == "auto":
            exp_kw["response_lowpass"] = "auto"
        else:
            problems.append(("experiment.response_lowpass", "must be 'off' or 'auto'"))
    elif present:
        key = present[0]
        v = _coerce(e[key], float, f"experiment.{key}", problems)
        if v is not None:
            exp_kw["response_lowpass"] = v * ANGULAR_MHZ if key.endswith("_mhz") else v

    if "sample_dt" in exp_kw:
        noise_kw["dt"] = exp_kw["sample_dt"]

    atom = _build(LambdaAtomParams, "atom", atom_kw, problems, defaults.atom)
    medium = _build(MediumConfig, "medium", medium_kw, problems, defaults.medium)
    noise = _build(NoiseModel, "noise", noise_kw, problems, defaults.noise)
    lock = _build(LockParams, "phase_lock", lock_kw, problems, LockParams())
    experiment = None
    if None not in (atom, medium, noise):
        experiment = _build(ExperimentConfig, "experiment",
                            dict(exp_kw, atom=atom, medium=medium, noise=noise), problems, defaults)
    if problems:
        raise ConfigError(problems)
    return RunConfig(experiment, lock)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _boundary_value(v: float, factor: float) -> Optional[float]:
    """A float ``m`` with ``m * factor == v`` exactly, or ``None``."""
    m = v / factor
    if m * factor == v:
        return m
    for direction in (math.inf, -math.inf):
        c = m
        for _ in range(4):
            c = math.nextafter(c, direction)
            if c * factor == v:
                return c
    return None


def _emit_table(obj, table, exclude=()) -> dict[str, Any]:
    out = {}
    for key, attr, factor, kind in table:
        if attr in exclude:
            continue
        v = getattr(obj, attr)
        if v is None:
            continue
        if factor is None:
            out[key] = kind(v)
            continue
        m = _boundary_value(float(v), factor)
        if m is None:
            out[_si_key(key)] = float(v)
        else:
            out[key] = m
    return out


def emit_config(cfg: RunConfig) -> str:
    """TOML text that :func:`parse_config` turns back into ``cfg`` exactly."""
    exp = cfg.experiment
    medium = _emit_table(exp.medium, _MEDIUM)
    if exp.medium.eta_override is not None:
        for key, si, v in zip(_ETA_KEYS, ("eta_b_si", "eta_c_si"), exp.medium.eta_override):
            m = _boundary_value(float(v), _ETA_FACTOR)
            if m is None:
                medium[si] = float(v)
            else:
                medium[key] = m
    experiment = _emit_table(exp, _EXPERIMENT)
    experiment["b_grid_gauss"] = list(exp.b_grid)
    lp = exp.response_lowpass
    if lp is None:
        experiment["response_lowpass"] = "off"
    elif lp == "auto":
        experiment["response_lowpass"] = "auto"
    else:
        m = _boundary_value(float(lp), ANGULAR_MHZ)
        if m is None:
            experiment["response_lowpass_si"] = float(lp)
        else:
            experiment["response_lowpass_mhz"] = m
    doc = {
        "atom": _emit_table(exp.atom, _ATOM),
        "medium": medium,
        "noise": _emit_table(exp.noise, _NOISE),
        "experiment": experiment,
        "phase_lock": _emit_table(cfg.phase_lock, _PHASE_LOCK),
    }
    return tomli_w.dumps(doc)
