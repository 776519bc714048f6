"""Slab-by-slab propagation of the two Rabi amplitudes through the cell.

The fields obey::

    dW1/dz = -i eta_b rho_ab
    dW2/dz = +i eta_c rho_ca      (rho_ac read as the conjugate partner of rho_ca)

with the medium in steady state at every z.  Integration uses fixed-step
classical RK4, re-evaluating the coherences at every stage.  Each time sample
is independent, so the batch entry point :func:`propagate_batch` pushes a
whole vector of carrier offsets through the cell in one kernel call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import constants

from . import _kernels
from .errors import NumericalError
from .lambda_medium import DriveFields, LambdaAtomParams

__all__ = [
    "MediumConfig",
    "FieldState",
    "PropagationProfile",
    "RB87_D1_ANGULAR_FREQUENCY",
    "coupling_constants",
    "step",
    "propagate",
    "propagate_batch",
    "transmission",
    "convergence_check",
]

FieldState = DriveFields

#: 87Rb D1 line, 377.107 THz, used as the absolute carrier for eta.
RB87_D1_ANGULAR_FREQUENCY = 2.0 * math.pi * 377.107463380e12


@dataclass(frozen=True)
class MediumConfig:
    """Cell geometry and light-matter coupling.

    ``dipole_b``/``dipole_c`` enter ``eta = nu N p / (2 eps0 c)`` as written,
    so they must carry whatever units make eta come out in rad/(s m).
    Most configurations set ``eta_override`` instead.
    """

    length: float = 0.075
    n_slabs: int = 400
    density: float = 1.0e18
    dipole_b: float = 1.0e-29
    dipole_c: float = 1.0e-29
    epsilon0: float = constants.epsilon_0
    c_light: float = constants.c
    eta_override: Optional[tuple[float, float]] = None
    literal_rho_ca: bool = False

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not (math.isfinite(self.length) and self.length > 0):
            out.append("length must be positive")
        if int(self.n_slabs) != self.n_slabs or self.n_slabs < 1:
            out.append("n_slabs must be a positive integer")
        if not (math.isfinite(self.density) and self.density >= 0):
            out.append("density must be non-negative")
        if self.eta_override is None:
            for name in ("dipole_b", "dipole_c", "epsilon0", "c_light"):
                v = getattr(self, name)
                if not (math.isfinite(v) and v > 0):
                    out.append(f"{name} must be positive")
        else:
            if len(self.eta_override) != 2 or not all(
                math.isfinite(e) and e >= 0 for e in self.eta_override
            ):
                out.append("eta_override must be two non-negative finite numbers")
        return out


@dataclass(frozen=True)
class PropagationProfile:
    z_grid: np.ndarray
    omega1_of_z: np.ndarray
    omega2_of_z: np.ndarray


def coupling_constants(medium: MediumConfig, nu: float) -> tuple[float, float]:
    """Return ``(eta_b, eta_c)`` in rad/(s m).

    Both beams share the carrier ``nu`` (absolute angular frequency).
    """
    if not math.isfinite(nu):
        raise ValueError("carrier frequency must be finite")
    if medium.eta_override is not None:
        eta_b, eta_c = medium.eta_override
        return float(eta_b), float(eta_c)
    scale = nu * medium.density / (2.0 * medium.epsilon0 * medium.c_light)
    return scale * medium.dipole_b, scale * medium.dipole_c


def _check_finite(w1, w2, where):
    if not (np.all(np.isfinite(w1)) and np.all(np.isfinite(w2))):
        raise NumericalError(f"non-finite field amplitude during {where}; reduce eta*dz")


def propagate_batch(w1, w2, nu, params: LambdaAtomParams, eta, length: float,
                    n_slabs: int, *, literal_rho_ca: bool = False,
                    mode: int = _kernels.MODE_FREE, rcb_table=None):
    """Propagate arrays of input amplitudes, one carrier offset per sample.

    ``nu`` is an array (or scalar) of instantaneous carrier frequencies in the
    same frame as the atomic transition frequencies.  Returns the exit
    amplitudes ``(w1_out, w2_out)``.  ``mode``/``rcb_table`` select the
    record/fixed ground-coherence variants used by the low-pass response.
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=np.float64))
    n = nu.shape[0]
    w1 = np.broadcast_to(np.asarray(w1, dtype=np.complex128), (n,)).copy()
    w2 = np.broadcast_to(np.asarray(w2, dtype=np.complex128), (n,)).copy()
    if rcb_table is None:
        rcb_table = np.zeros((1, 1), dtype=np.complex128)
    d1 = params.omega_ab - nu
    d2 = params.omega_ac - nu
    eta_b, eta_c = eta
    out1, out2 = _kernels.rk4_slabs(
        w1, w2, d1, d2, float(params.omega_cb), float(params.gamma_ab),
        float(params.gamma_ca), float(params.gamma_cb), float(params.n_ba),
        float(params.n_ca), float(eta_b), float(eta_c), float(length) / n_slabs,
        int(n_slabs), bool(params.conjugate_omega2), bool(literal_rho_ca),
        int(mode), rcb_table,
    )
    _check_finite(out1, out2, "propagation")
    return out1, out2


def step(fields: FieldState, params: LambdaAtomParams, eta, dz: float,
         *, literal_rho_ca: bool = False) -> FieldState:
    """Advance both amplitudes across one slab of thickness ``dz``."""
    if not dz > 0:
        raise ValueError("dz must be positive")
    o1, o2 = propagate_batch(fields.omega1, fields.omega2, fields.nu, params, eta,
                             dz, 1, literal_rho_ca=literal_rho_ca)
    return FieldState(complex(o1[0]), complex(o2[0]), fields.nu)


def propagate(fields_in: FieldState, params: LambdaAtomParams,
              medium: MediumConfig, nu_absolute: float = RB87_D1_ANGULAR_FREQUENCY):
    """Propagate one field state through the whole cell.

    Returns ``(fields_out, profile)``; the profile holds the amplitudes at
    every slab boundary.
    """
    eta = coupling_constants(medium, nu_absolute)
    n = medium.n_slabs
    dz = medium.length / n
    w1 = np.empty(n + 1, dtype=np.complex128)
    w2 = np.empty(n + 1, dtype=np.complex128)
    w1[0] = fields_in.omega1
    w2[0] = fields_in.omega2
    state = fields_in
    if eta == (0.0, 0.0):
        w1[:] = w1[0]
        w2[:] = w2[0]
    else:
        for s in range(n):
            state = step(state, params, eta, dz, literal_rho_ca=medium.literal_rho_ca)
            w1[s + 1] = state.omega1
            w2[s + 1] = state.omega2
    z = np.linspace(0.0, medium.length, n + 1)
    out = replace(fields_in, omega1=complex(w1[-1]), omega2=complex(w2[-1]))
    return out, PropagationProfile(z, w1, w2)


def transmission(fields_in: FieldState, fields_out: FieldState) -> tuple[float, float]:
    i1 = abs(fields_in.omega1) ** 2
    i2 = abs(fields_in.omega2) ** 2
    if i1 == 0 or i2 == 0:
        raise ValueError("input intensity must be positive for both beams")
    return abs(fields_out.omega1) ** 2 / i1, abs(fields_out.omega2) ** 2 / i2


def convergence_check(fields_in: FieldState, params: LambdaAtomParams,
                      medium: MediumConfig, rtol: float = 1e-6,
                      nu_absolute: float = RB87_D1_ANGULAR_FREQUENCY):
    """Compare exit intensities at ``n_slabs`` and ``2 n_slabs``.

    Returns ``(converged, max_relative_change)``.
    """
    eta = coupling_constants(medium, nu_absolute)
    res = []
    for n in (medium.n_slabs, 2 * medium.n_slabs):
        o1, o2 = propagate_batch(fields_in.omega1, fields_in.omega2, fields_in.nu,
                                 params, eta, medium.length, n,
                                 literal_rho_ca=medium.literal_rho_ca)
        res.append(np.array([abs(o1[0]) ** 2, abs(o2[0]) ** 2]))
    scale = np.maximum(np.abs(res[1]), np.finfo(float).tiny)
    change = float(np.max(np.abs(res[0] - res[1]) / scale))
    return change < rtol, change
