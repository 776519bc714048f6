"""Steady-state response of a three-level Lambda medium to two drive fields.

Level ``a`` is the common excited state, ``b`` and ``c`` are the two ground
sublevels.  Beam 1 (Rabi frequency ``omega1``) drives a<->b, beam 2 drives
a<->c, and both beams share one instantaneous carrier frequency ``nu``.

All rates and frequencies are angular (rad/s).  Transition frequencies are
measured from a common reference (the scenarios use the centre of the
one-photon line), so only differences ``omega - nu`` ever enter.

The coherences are evaluated exactly as::

    rho_cb = -(G_ca + G_ab) / (2 G_ca G_ab) * W1 W2 / (G_cb + |W2|^2/G_ab + |W1|^2/G_ca)
    rho_ab = -i (n_ba W1 + rho_cb W2) / G_ab
    rho_ca =  i (n_ca W2 + rho_cb W1) / G_ca

with complex linewidths ``G_ab = g_ab + i(w_ab - nu)``,
``G_ca = g_ca - i(w_ac - nu)`` and ``G_cb = g_cb + i w_cb``.  The product
``W1 W2`` is taken literally; ``conjugate_omega2=True`` swaps it for
``W1 conj(W2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LambdaAtomParams",
    "DriveFields",
    "ComplexLinewidths",
    "Coherences",
    "complex_linewidths",
    "steady_state",
    "coherences",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LambdaAtomParams:
    """Decay rates, transition frequencies and populations of the Lambda atom.

    Populations are fixed inputs.  By default all population sits in the two
    ground sublevels (``n_a = 0``, ``n_b = n_c = 1/2``).
    """

    gamma_ab: float = TWO_PI * 3.0e6
    gamma_ca: float = TWO_PI * 3.0e6
    gamma_cb: float = TWO_PI * 1.0e6
    omega_ab: float = 0.0
    omega_ac: float = 0.0
    omega_cb: float = 0.0
    n_a: float = 0.0
    n_b: float = 0.5
    n_c: float = 0.5
    conjugate_omega2: bool = False

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        for name in ("gamma_ab", "gamma_ca", "gamma_cb", "omega_ab", "omega_ac",
                     "omega_cb", "n_a", "n_b", "n_c"):
            if not math.isfinite(getattr(self, name)):
                out.append(f"{name} must be finite")
        if out:
            return out
        for name in ("gamma_ab", "gamma_ca", "gamma_cb"):
            if getattr(self, name) <= 0:
                out.append(f"{name} must be positive")
        if not (self.gamma_cb < self.gamma_ab and self.gamma_cb < self.gamma_ca):
            out.append("gamma_cb must be smaller than gamma_ab and gamma_ca")
        if min(self.n_a, self.n_b, self.n_c) < 0:
            out.append("populations must be non-negative")
        if abs(self.n_a + self.n_b + self.n_c - 1.0) > 1e-12:
            out.append("populations n_a + n_b + n_c must sum to 1")
        return out

    @property
    def n_ba(self) -> float:
        return self.n_b - self.n_a

    @property
    def n_ca(self) -> float:
        return self.n_c - self.n_a

    def with_zeeman_shift(self, shift: float) -> "LambdaAtomParams":
        """Split the ground sublevels by an extra ``shift`` (rad/s).

        ``b`` moves down and ``c`` moves up by ``shift/2`` each, so
        ``omega_cb`` grows by ``shift`` while the two optical transitions move
        in opposite directions.
        """
        from dataclasses import replace

        return replace(
            self,
            omega_ab=self.omega_ab + 0.5 * shift,
            omega_ac=self.omega_ac - 0.5 * shift,
            omega_cb=self.omega_cb + shift,
        )


@dataclass(frozen=True)
class DriveFields:
    """Complex Rabi frequencies of both beams and their shared carrier."""

    omega1: complex
    omega2: complex
    nu: float = 0.0


@dataclass(frozen=True)
class ComplexLinewidths:
    big_gamma_ab: complex
    big_gamma_ca: complex
    big_gamma_cb: complex


@dataclass(frozen=True)
class Coherences:
    rho_cb: complex
    rho_ab: complex
    rho_ca: complex

    def max_magnitude(self) -> float:
        return max(abs(self.rho_cb), abs(self.rho_ab), abs(self.rho_ca))


def complex_linewidths(params: LambdaAtomParams, drive: DriveFields) -> ComplexLinewidths:
    nu = drive.nu
    return ComplexLinewidths(
        big_gamma_ab=complex(params.gamma_ab, params.omega_ab - nu),
        big_gamma_ca=complex(params.gamma_ca, -(params.omega_ac - nu)),
        # nu_1 - nu_2 cancels because both beams share one carrier
        big_gamma_cb=complex(params.gamma_cb, params.omega_cb),
    )


def coherences(w1, w2, g_ab, g_ca, g_cb, n_ba, n_ca, conjugate_omega2=False):
    """Vectorised coherence formula shared by every code path.

    Works on Python scalars, numpy arrays and inside numba kernels.  Returns
    ``(rho_cb, rho_ab, rho_ca)``.
    """
    w2_num = np.conj(w2) if conjugate_omega2 else w2
    i1 = w1.real * w1.real + w1.imag * w1.imag
    i2 = w2.real * w2.real + w2.imag * w2.imag
    rho_cb = -(g_ca + g_ab) / (2.0 * g_ca * g_ab) * (w1 * w2_num) / (g_cb + i2 / g_ab + i1 / g_ca)
    rho_ab = -1j * (n_ba * w1 + rho_cb * w2) / g_ab
    rho_ca = 1j * (n_ca * w2 + rho_cb * w1) / g_ca
    return rho_cb, rho_ab, rho_ca


def steady_state(params: LambdaAtomParams, drive: DriveFields) -> Coherences:
    """Steady-state coherences for one set of fields.

    Raises
    ------
    ValueError
        If any field amplitude or the carrier is not finite.
    """
    w1 = complex(drive.omega1)
    w2 = complex(drive.omega2)
    for name, value in (("omega1", w1.real), ("omega1", w1.imag),
                        ("omega2", w2.real), ("omega2", w2.imag), ("nu", drive.nu)):
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite")
    lw = complex_linewidths(params, drive)
    rho_cb, rho_ab, rho_ca = coherences(
        w1, w2, lw.big_gamma_ab, lw.big_gamma_ca, lw.big_gamma_cb,
        params.n_ba, params.n_ca, params.conjugate_omega2,
    )
    return Coherences(complex(rho_cb), complex(rho_ab), complex(rho_ca))
