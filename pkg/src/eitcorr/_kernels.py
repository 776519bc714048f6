"""Hot inner loops, compiled with numba when available.

Every kernel exists twice: a numba ``@njit`` version looping over scalars and
a numpy version vectorised over the sample axis.  The physics (the coherence
formula and the field derivatives) is written once and shared by both.

Set ``EITCORR_DISABLE_NUMBA=1`` before import to force the numpy path.  Both
implementations are always importable as :data:`numba_impl` (``None`` when
numba is missing) and :data:`numpy_impl` so they can be compared directly.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np
from scipy.signal import lfilter


DISABLE_ENV = "EITCORR_DISABLE_NUMBA"

MODE_FREE = 0
MODE_RECORD = 1
MODE_FIXED = 2


def _env_disables_numba() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def field_derivatives(w1, w2, c1, c2, rcb_pref, inv_ab, inv_ca, g_cb, n_ba, n_ca,
                      conj2, use_fixed, rcb_fixed):
    """dW1/dz, dW2/dz and the rho_cb used to get them.

    Per-sample constants are hoisted out of the z loop::

        c1 = -eta_b / G_ab,  c2 = -/+ eta_c / G_ca,  rcb_pref = (G_ca + G_ab) / (2 G_ca G_ab)

    so that ``dW1/dz = -i eta_b rho_ab = c1 (n_ba W1 + rho_cb W2)`` and the
    beam-2 equation reads ``c2 (n_ca W2 + rho_cb W1)``.

    The second propagation equation is written in terms of rho_ac.  Only
    rho_ca is available, so rho_ac is taken as its conjugate partner and the
    conjugation folded into the equation (``dW2/dz = +i eta_c rho_ca``, the
    default sign of ``c2``).  Both beams then attenuate at resonance.
    ``use_fixed`` replaces the instantaneous rho_cb with ``rcb_fixed``.
    """
    if use_fixed:
        rho_cb = rcb_fixed
    else:
        w2n = np.conj(w2) if conj2 else w2
        i1 = w1.real * w1.real + w1.imag * w1.imag
        i2 = w2.real * w2.real + w2.imag * w2.imag
        den = g_cb + i2 * inv_ab + i1 * inv_ca
        num = -rcb_pref * (w1 * w2n)
        rho_cb = num * np.conj(den) / (den.real * den.real + den.imag * den.imag)
    return c1 * (n_ba * w1 + rho_cb * w2), c2 * (n_ca * w2 + rho_cb * w1), rho_cb


def sample_constants(d1, d2, gamma_ab, gamma_ca, eta_b, eta_c, literal):
    """Per-sample (c1, c2, rcb_pref, inv_ab, inv_ca) from one-photon detunings."""
    inv_ab = 1.0 / (gamma_ab + 1j * d1)
    inv_ca = 1.0 / (gamma_ca - 1j * d2)
    sign = -1.0 if literal else 1.0
    rcb_pref = 0.5 * (inv_ab + inv_ca)
    return -eta_b * inv_ab, -sign * eta_c * inv_ca, rcb_pref, inv_ab, inv_ca


# --------------------------------------------------------------------------
# numpy implementations


def _rk4_slabs_numpy(w1, w2, d1, d2, omega_cb, gamma_ab, gamma_ca, gamma_cb,
                     n_ba, n_ca, eta_b, eta_c, h, n_slabs, conj2, literal,
                     mode, rcb_table):
    c1, c2, pref, inv_ab, inv_ca = sample_constants(
        np.asarray(d1, dtype=np.float64), np.asarray(d2, dtype=np.float64),
        gamma_ab, gamma_ca, eta_b, eta_c, literal)
    g_cb = gamma_cb + 1j * omega_cb
    a = np.array(w1, dtype=np.complex128)
    b = np.array(w2, dtype=np.complex128)
    fixed = mode == MODE_FIXED
    args = (c1, c2, pref, inv_ab, inv_ca, g_cb, n_ba, n_ca, conj2, fixed)
    half = 0.5 * h
    sixth = h / 6.0
    for s in range(n_slabs):
        r = rcb_table[s] if fixed else 0.0
        k1a, k1b, rcb = field_derivatives(a, b, *args, r)
        if mode == MODE_RECORD:
            rcb_table[s] = rcb
        k2a, k2b, _ = field_derivatives(a + half * k1a, b + half * k1b, *args, r)
        k3a, k3b, _ = field_derivatives(a + half * k2a, b + half * k2b, *args, r)
        k4a, k4b, _ = field_derivatives(a + h * k3a, b + h * k3b, *args, r)
        a = a + sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        b = b + sixth * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
    return a, b


def _ou_recursion_numpy(x0, decay, innovations):
    out = np.empty(innovations.shape[0])
    out[0] = x0
    if out.shape[0] > 1:
        out[1:], _ = lfilter([1.0], [1.0, -decay], innovations[1:], zi=[decay * x0])
    return out


def _lowpass_rows_numpy(x, alpha, state):
    """First-order low-pass along axis 1; ``state`` holds the previous output."""
    zi = ((1.0 - alpha) * state)[:, None]
    y, zf = lfilter([alpha], [1.0, -(1.0 - alpha)], x, axis=1, zi=zi)
    state[:] = y[:, -1]
    return y


def _overlap_correlation_numpy(x, y, lags):
    n = x.shape[0]
    out = np.empty(lags.shape[0])
    for j, k in enumerate(lags):
        if k >= 0:
            u, v = x[: n - k], y[k:]
        else:
            u, v = x[-k:], y[: n + k]
        du = u - u.mean()
        dv = v - v.mean()
        out[j] = np.mean(du * dv) / np.sqrt(np.mean(du * du) * np.mean(dv * dv))
    return out


def _theta_euler_numpy(theta0, a, b, dt, kicks):
    theta = np.empty(kicks.shape[0] + 1)
    theta[0] = theta0
    th = theta0
    sin = np.sin
    for i in range(kicks.shape[0]):
        th = th + (a - b * sin(th)) * dt + kicks[i]
        theta[i + 1] = th
    return theta


numpy_impl = SimpleNamespace(
    name="numpy",
    rk4_slabs=_rk4_slabs_numpy,
    ou_recursion=_ou_recursion_numpy,
    lowpass_rows=_lowpass_rows_numpy,
    overlap_correlation=_overlap_correlation_numpy,
    theta_euler=_theta_euler_numpy,
)


# --------------------------------------------------------------------------
# numba implementations


def _build_numba_impl():
    njit = numba.njit
    opts = dict(cache=True, nogil=True, error_model="numpy")
    derivs = njit(inline="always", **opts)(field_derivatives)
    constants = njit(inline="always", **opts)(sample_constants)

    @njit(**opts)
    def rk4_slabs(w1, w2, d1, d2, omega_cb, gamma_ab, gamma_ca, gamma_cb,
                  n_ba, n_ca, eta_b, eta_c, h, n_slabs, conj2, literal,
                  mode, rcb_table):
        n = w1.shape[0]
        out1 = np.empty(n, dtype=np.complex128)
        out2 = np.empty(n, dtype=np.complex128)
        g_cb = gamma_cb + 1j * omega_cb
        fixed = mode == 2
        half = 0.5 * h
        sixth = h / 6.0
        for i in range(n):
            c1, c2, pref, inv_ab, inv_ca = constants(d1[i], d2[i], gamma_ab, gamma_ca,
                                                     eta_b, eta_c, literal)
            a = w1[i] + 0j
            b = w2[i] + 0j
            for s in range(n_slabs):
                r = rcb_table[s, i] if fixed else 0j
                k1a, k1b, rcb = derivs(a, b, c1, c2, pref, inv_ab, inv_ca, g_cb,
                                       n_ba, n_ca, conj2, fixed, r)
                if mode == 1:
                    rcb_table[s, i] = rcb
                k2a, k2b, _ = derivs(a + half * k1a, b + half * k1b, c1, c2, pref, inv_ab,
                                     inv_ca, g_cb, n_ba, n_ca, conj2, fixed, r)
                k3a, k3b, _ = derivs(a + half * k2a, b + half * k2b, c1, c2, pref, inv_ab,
                                     inv_ca, g_cb, n_ba, n_ca, conj2, fixed, r)
                k4a, k4b, _ = derivs(a + h * k3a, b + h * k3b, c1, c2, pref, inv_ab,
                                     inv_ca, g_cb, n_ba, n_ca, conj2, fixed, r)
                a = a + sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
                b = b + sixth * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
            out1[i] = a
            out2[i] = b
        return out1, out2

    @njit(**opts)
    def ou_recursion(x0, decay, innovations):
        out = np.empty(innovations.shape[0])
        out[0] = x0
        for i in range(1, innovations.shape[0]):
            out[i] = decay * out[i - 1] + innovations[i]
        return out

    @njit(**opts)
    def lowpass_rows(x, alpha, state):
        rows, n = x.shape
        y = np.empty_like(x)
        for r in range(rows):
            prev = state[r]
            for i in range(n):
                prev = prev + alpha * (x[r, i] - prev)
                y[r, i] = prev
            state[r] = prev
        return y

    @njit(**opts)
    def overlap_correlation(x, y, lags):
        n = x.shape[0]
        out = np.empty(lags.shape[0])
        for j in range(lags.shape[0]):
            k = lags[j]
            if k >= 0:
                i0, j0, m = 0, k, n - k
            else:
                i0, j0, m = -k, 0, n + k
            su = 0.0
            sv = 0.0
            for t in range(m):
                su += x[i0 + t]
                sv += y[j0 + t]
            mu = su / m
            mv = sv / m
            cuv = 0.0
            cuu = 0.0
            cvv = 0.0
            for t in range(m):
                du = x[i0 + t] - mu
                dv = y[j0 + t] - mv
                cuv += du * dv
                cuu += du * du
                cvv += dv * dv
            out[j] = (cuv / m) / np.sqrt((cuu / m) * (cvv / m))
        return out

    @njit(**opts)
    def theta_euler(theta0, a, b, dt, kicks):
        theta = np.empty(kicks.shape[0] + 1)
        theta[0] = theta0
        th = theta0
        for i in range(kicks.shape[0]):
            th = th + (a - b * np.sin(th)) * dt + kicks[i]
            theta[i + 1] = th
        return theta

    return SimpleNamespace(
        name="numba",
        rk4_slabs=rk4_slabs,
        ou_recursion=ou_recursion,
        lowpass_rows=lowpass_rows,
        overlap_correlation=overlap_correlation,
        theta_euler=theta_euler,
    )


numba_impl = _build_numba_impl() if numba is not None else None

active = numba_impl if (numba_impl is not None and not _env_disables_numba()) else numpy_impl
BACKEND = active.name

rk4_slabs = active.rk4_slabs
ou_recursion = active.ou_recursion
lowpass_rows = active.lowpass_rows
overlap_correlation = active.overlap_correlation
theta_euler = active.theta_euler
