"""Exact constant-control solution in the Fourier domain.

With eps(z, w) = integral eps(z, t) e^{iwt} dt the field equations become a
2x2 linear ODE in z, d_z (eps, eps'*) = M(w) (eps, eps'*), with

    M = (i kappa / F) [[w + i Gamma0,  -Omega^2/Dhf],
                       [Omega^2/Dhf,   -(Omega^2/Dhf^2)(w + i Gamma)]]

and F = Omega^2 + (Gamma - iw)(Gamma0 - iw).  The lower-right entry is of
order kappa gamma / Dhf^2 and is dropped by default, which gives the
cosh/sinh form in :func:`transfer_matrix`.  With ``keep_m22=True`` the full
matrix is exponentiated in closed form instead, so nothing is approximated
beyond constant control.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import SingularResponseError
from .mb_solver import BoundaryInputs, InputsLike, _as_inputs
from .params import DerivedRates, MediumParams, mhz_to_rad

DEFAULT_BANDWIDTH = mhz_to_rad(160.0)
MIN_N_OMEGA = 2 ** 14
ALIAS_TOLERANCE = 1e-6
_SINGULAR_RTOL = 1e-12


def _sinhc(x):
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 + x2 / 6.0 + x2 * x2 / 120.0, np.sinh(safe) / safe)


@dataclass(frozen=True)
class SpectralResponse:
    """Per-frequency quantities of the constant-control medium."""

    omega_grid: np.ndarray
    F: np.ndarray
    sigma: np.ndarray
    xi: np.ndarray
    beta: np.ndarray
    M: np.ndarray  # shape (n, 2, 2), lower-right entry included


def spectral_response(params: MediumParams, derived: DerivedRates, omega,
                      beta_sign: int = 1) -> SpectralResponse:
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    G0 = derived.Gamma0_complex
    G = derived.Gamma_complex
    Om2 = derived.omega ** 2
    F = Om2 + (G - 1j * w) * (G0 - 1j * w)
    scale = Om2 + abs(G) ** 2
    if np.any(np.abs(F) < _SINGULAR_RTOL * scale):
        k = int(np.argmin(np.abs(F)))
        raise SingularResponseError(
            f"F(w) vanishes near w = {w[k]:.6g} rad/us (undamped resonance; check gamma0 and delta)"
        )
    kappa = derived.kappa
    dR = derived.delta_R
    dhf = derived.delta_hf
    beta = beta_sign * np.sqrt((G0 - 1j * w) ** 2 + 4.0 * dR ** 2)
    sigma = kappa * (1j * G0 + w) / (2.0 * F)
    xi = kappa * beta / (2.0 * F)
    pref = 1j * kappa / F
    M = np.empty(w.shape + (2, 2), dtype=complex)
    M[:, 0, 0] = pref * (w + 1j * G0)
    M[:, 0, 1] = -pref * Om2 / dhf
    M[:, 1, 0] = pref * Om2 / dhf
    M[:, 1, 1] = -pref * (Om2 / dhf ** 2) * (w + 1j * G)
    return SpectralResponse(w, F, sigma, xi, beta, M)


def _expm2(M: np.ndarray, z: float, root_sign: int = 1) -> np.ndarray:
    """exp(M z) for a stack of 2x2 matrices, in eigen-projector form.

    With h = tr M / 2, d = (M00 - M11)/2 and q = sqrt(d^2 + M01 M10),

        exp(Mz) = [e^{(h+q)z} (M - (h-q)) - e^{(h-q)z} (M - (h+q))] / 2q.

    The diagonal factors q +- d are formed so that neither cancels (their
    product is M01 M10), and each exponential is taken of its own exponent.
    The cosh/sinh form loses all relative accuracy where the medium is opaque
    (cosh ~ sinh ~ e^{|qz|}/2 while the result is ~ e^{-|qz|}); this form does
    not.  For |qz| < 1/2 the sinh(qz)/q form is used instead, which is regular
    at q = 0.  The result does not depend on ``root_sign``.
    """
    a, b, c, e = M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1]
    h = 0.5 * (a + e)
    dd = 0.5 * (a - e)
    bc = b * c
    q = root_sign * np.sqrt(dd * dd + bc)
    T = np.empty(M.shape, dtype=complex)

    small = np.abs(q * z) < 0.5
    if np.any(small):
        ph = np.exp(h[small] * z)
        qz = q[small] * z
        ch = np.cosh(qz)
        shc = z * _sinhc(qz)
        T[small, 0, 0] = ph * (ch + shc * dd[small])
        T[small, 1, 1] = ph * (ch - shc * dd[small])
        T[small, 0, 1] = ph * shc * b[small]
        T[small, 1, 0] = ph * shc * c[small]
    big = ~small
    if np.any(big):
        qb, db, bcb = q[big], dd[big], bc[big]
        A = qb + db
        B = qb - db
        swap = np.abs(A) < np.abs(B)
        A = np.where(swap, bcb / np.where(swap, B, 1.0), A)
        B = np.where(swap, B, bcb / np.where(swap, 1.0, A))
        ep = np.exp((h[big] + qb) * z)
        em = np.exp((h[big] - qb) * z)
        two_q = 2.0 * qb
        T[big, 0, 0] = (A * ep + B * em) / two_q
        T[big, 1, 1] = (B * ep + A * em) / two_q
        T[big, 0, 1] = b[big] * (ep - em) / two_q
        T[big, 1, 0] = c[big] * (ep - em) / two_q
    return T


def transfer_matrix(params: MediumParams, derived: DerivedRates, z: float, omega,
                    keep_m22: bool = False, beta_sign: int = 1) -> np.ndarray:
    """T(z, w) with shape (n_omega, 2, 2) mapping (eps, eps'*)(0) to (eps, eps'*)(z).

    Without the lower-right entry of M this is

        e^{i sigma z} [[cosh xi z + i (sigma/xi) sinh xi z,  i (2 Delta_R/beta) sinh xi z],
                       [-i (2 Delta_R/beta) sinh xi z,       cosh xi z - i (sigma/xi) sinh xi z]]

    (the eigenvalues of M are i sigma +- xi).  It is evaluated through
    :func:`_expm2`, which stays accurate where the signal is absorbed; with
    ``keep_m22=True`` the full matrix is exponentiated the same way.  The
    square-root sign ``beta_sign`` does not change the result.
    """
    resp = spectral_response(params, derived, omega, beta_sign=beta_sign)
    M = resp.M
    if not keep_m22:
        M = M.copy()
        M[:, 1, 1] = 0.0
    return _expm2(M, z, root_sign=beta_sign)


@dataclass
class SpectralPropagation:
    """Boundary and output traces on the transform grid (restricted to the requested window)."""

    t: np.ndarray
    eps_in: np.ndarray
    eps_prime_in: np.ndarray
    eps_out: np.ndarray
    eps_prime_out: np.ndarray
    z: Union[float, np.ndarray]
    omega_grid: np.ndarray
    n_omega: int


def _transform_grid(t_start, t_end, bandwidth, n_omega):
    dt = 2.0 * math.pi / bandwidth
    span = t_end - t_start
    need = int(math.ceil(2.0 * span / dt))
    n = max(MIN_N_OMEGA, 1 << max(need - 1, 1).bit_length())
    if n_omega is not None:
        if n_omega < need:
            raise ValueError(f"n_omega = {n_omega} too small to hold the window without wrap-around ({need})")
        n = int(n_omega)
    t = t_start + dt * np.arange(n)
    w = 2.0 * math.pi * np.fft.fftfreq(n, dt)
    return t, w, dt


def _check_aliasing(inputs: BoundaryInputs, t_start, dt, n, bandwidth):
    # sample at twice the rate and measure the energy outside [-B/2, B/2]
    tf = t_start + 0.5 * dt * np.arange(2 * n)
    wf = 2.0 * math.pi * np.fft.fftfreq(2 * n, 0.5 * dt)
    outside = np.abs(wf) > 0.5 * bandwidth
    for name, fn in (("signal", inputs.signal), ("Stokes", inputs.stokes)):
        spec = np.abs(np.fft.fft(fn(tf))) ** 2
        total = spec.sum()
        if total > 0 and spec[outside].sum() > ALIAS_TOLERANCE * total:
            warnings.warn(
                f"{name} boundary trace has {spec[outside].sum() / total:.2e} of its energy outside "
                f"the transform bandwidth", RuntimeWarning, stacklevel=3,
            )


def forward_transform(x: np.ndarray, dt: float) -> np.ndarray:
    """sum_n x_n e^{+i w_k n dt} dt, on the ``fftfreq`` ordering."""
    return np.fft.ifft(x) * (x.shape[-1] * dt)


def inverse_transform(X: np.ndarray, dt: float) -> np.ndarray:
    return np.fft.fft(X) / (X.shape[-1] * dt)


def parseval_energies(x: np.ndarray, dt: float):
    """(energy from time samples, energy from spectrum); equal up to rounding."""
    X = forward_transform(x, dt)
    dw = 2.0 * math.pi / (x.shape[-1] * dt)
    return float(np.sum(np.abs(x) ** 2) * dt), float(np.sum(np.abs(X) ** 2) * dw / (2.0 * math.pi))


def propagate_spectral(
    params: MediumParams,
    derived: DerivedRates,
    inputs: InputsLike,
    t_start: float,
    t_end: float,
    z: float = 1.0,
    bandwidth: float = DEFAULT_BANDWIDTH,
    n_omega: Optional[int] = None,
    keep_m22: bool = False,
) -> SpectralPropagation:
    """Outputs at position ``z`` for boundary inputs, by transform, multiply, inverse transform.

    The transform frame starts at ``t_start`` and is at least twice as long as
    the requested window, so the delayed response does not wrap around into it.
    """
    inputs = _as_inputs(inputs)
    t, w, dt = _transform_grid(t_start, t_end, bandwidth, n_omega)
    _check_aliasing(inputs, t_start, dt, t.size, bandwidth)
    e0 = inputs.signal(t)
    ep0 = inputs.stokes(t)
    E0 = forward_transform(e0, dt)
    EP0 = forward_transform(ep0, dt)
    T = transfer_matrix(params, derived, z, w, keep_m22=keep_m22)
    e1 = inverse_transform(T[:, 0, 0] * E0 + T[:, 0, 1] * EP0, dt)
    ep1 = inverse_transform(T[:, 1, 0] * E0 + T[:, 1, 1] * EP0, dt)
    keep = t <= t_end + 0.5 * dt
    return SpectralPropagation(
        t=t[keep], eps_in=e0[keep], eps_prime_in=ep0[keep],
        eps_out=e1[keep], eps_prime_out=ep1[keep],
        z=z, omega_grid=w, n_omega=t.size,
    )


@dataclass
class SpectralSpinWave:
    z: np.ndarray
    t: np.ndarray
    S: np.ndarray  # [z, t]


def spinwave_spectral(
    params: MediumParams,
    derived: DerivedRates,
    inputs: InputsLike,
    t_start: float,
    t_end: float,
    z: Sequence[float],
    times: Optional[Sequence[float]] = None,
    bandwidth: float = DEFAULT_BANDWIDTH,
    n_omega: Optional[int] = None,
    keep_m22: bool = False,
) -> SpectralSpinWave:
    """S(z, t) = IFT of -(g Omega / F) [eps(z, w) - i ((Gamma - iw)/Dhf) eps'*(z, w)].

    ``times`` selects output instants (nearest transform-grid samples);
    by default the whole window is returned.
    """
    inputs = _as_inputs(inputs)
    t, w, dt = _transform_grid(t_start, t_end, bandwidth, n_omega)
    _check_aliasing(inputs, t_start, dt, t.size, bandwidth)
    E0 = forward_transform(inputs.signal(t), dt)
    EP0 = forward_transform(inputs.stokes(t), dt)
    resp = spectral_response(params, derived, w)
    G = derived.Gamma_complex
    factor = -derived.g * derived.omega / resp.F
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if times is None:
        idx = np.nonzero(t <= t_end + 0.5 * dt)[0]
    else:
        idx = np.array([int(round((tt - t_start) / dt)) for tt in times])
    S = np.empty((z.size, idx.size), dtype=complex)
    for i, zi in enumerate(z):
        T = transfer_matrix(params, derived, zi, w, keep_m22=keep_m22)
        Ez = T[:, 0, 0] * E0 + T[:, 0, 1] * EP0
        EPz = T[:, 1, 0] * E0 + T[:, 1, 1] * EP0
        Sw = factor * (Ez - 1j * ((G - 1j * w) / derived.delta_hf) * EPz)
        S[i] = inverse_transform(Sw, dt)[idx]
    return SpectralSpinWave(z=z, t=t[idx], S=S)
