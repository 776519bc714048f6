"""Relative-phase locking equation with Langevin forcing.

    d(theta)/dt = a - b sin(theta) + F(t)

``theta`` is the relative phase of the two modes.  The Langevin term built
from two independent white forces of equal strength,
``cos(theta/2) F_- + sin(theta/2) F_+``, has a theta-independent intensity,
so it is modelled as a single Gaussian white force with
``<F(t) F(t')> = 2 D delta(t - t')``.

For ``|a| < b`` the deterministic equation has the stable fixed point
``arcsin(a/b)`` (locked); otherwise theta runs with mean angular velocity
``sign(a) sqrt(a^2 - b^2)``.  How ``a`` and ``b`` relate to the Lambda-system
parameters is left open: roughly, ``a`` tracks the two-photon detuning and
``b`` the strength of the ground-state coherence, but nothing here depends
on that reading.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = ["LockParams", "PhaseTrajectory", "LockDiagnostics", "integrate_theta", "lock_diagnostics"]


@dataclass(frozen=True)
class LockParams:
    a: float = 0.5
    b: float = 1.0
    diffusion: float = 0.0
    theta0: float = 0.0
    dt: float = 1.0e-3
    n_steps: int = 100_000
    seed: int = 0

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        for name in ("a", "b", "diffusion", "theta0", "dt"):
            if not math.isfinite(getattr(self, name)):
                out.append(f"{name} must be finite")
        if self.b < 0:
            out.append("b must be non-negative")
        if self.diffusion < 0:
            out.append("diffusion must be non-negative")
        if not self.dt > 0:
            out.append("dt must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            out.append("n_steps must be a positive integer")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            out.append("seed must be an unsigned 64-bit integer")
        return out


@dataclass(frozen=True)
class PhaseTrajectory:
    dt: float
    theta: np.ndarray

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.theta.shape[0])


@dataclass(frozen=True)
class LockDiagnostics:
    locked: bool
    mean_drift_rate: float
    circular_spread: float


def integrate_theta(p: LockParams) -> PhaseTrajectory:
    """Euler-Maruyama integration; increments of the noise have variance ``2 D dt``."""
    if p.dt * (abs(p.a) + p.b) >= 0.1:
        raise ValueError("step too large: need dt * (|a| + b) < 0.1")
    n = int(p.n_steps)
    if p.diffusion > 0:
        rng = np.random.default_rng(p.seed)
        kicks = math.sqrt(2.0 * p.diffusion * p.dt) * rng.standard_normal(n)
    else:
        kicks = np.zeros(n)
    theta = _kernels.theta_euler(float(p.theta0), float(p.a), float(p.b), float(p.dt), kicks)
    return PhaseTrajectory(p.dt, theta)


def lock_diagnostics(traj: PhaseTrajectory, p: LockParams) -> LockDiagnostics:
    theta = np.asarray(traj.theta, dtype=np.float64)
    if theta.shape[0] < 100:
        raise ValueError("trajectory too short for diagnostics (need >= 100 samples)")
    slope = float(np.polyfit(traj.t, theta, 1)[0])
    tail = theta[theta.shape[0] // 2:]
    # rounding can push R a hair above 1 for a frozen phase
    r = min(float(abs(np.mean(np.exp(1j * tail)))), 1.0)
    spread = math.sqrt(-2.0 * math.log(r)) if r > 0 else math.inf
    scale = max(p.b, abs(p.a))
    locked = abs(slope) < 0.01 * scale and spread < math.pi / 2
    return LockDiagnostics(bool(locked), slope, spread)
