import math
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from eitfwm.analysis import relative_l2
from eitfwm.exceptions import SingularResponseError
from eitfwm.freq_solver import (
    forward_transform, inverse_transform, parseval_energies, propagate_spectral, spectral_response,
    spinwave_spectral, transfer_matrix,
)
from eitfwm.mb_solver import BoundaryInputs
from eitfwm.params import MediumParams, derive
from eitfwm.pulses import PulseSpec

from conftest import interp_complex, medium

W = np.linspace(-8.0, 8.0, 801)


@pytest.fixture(scope="module")
def fig8():
    p = medium(80, 150, 10)
    return p, derive(p)


@pytest.mark.parametrize("keep_m22", [False, True])
def test_identity_at_z0(fig8, keep_m22):
    p, d = fig8
    T = transfer_matrix(p, d, 0.0, W, keep_m22=keep_m22)
    assert np.abs(T - np.eye(2)).max() < 1e-15


def test_decoupled_limit():
    # coupling between the two fields falls off as 1/Dhf
    off = []
    for dhf in (1e9, 1e12):
        p = medium(80, 150, 10, delta_hf_mhz=dhf)
        d = derive(p)
        T = transfer_matrix(p, d, 1.0, W)
        sigma = spectral_response(p, d, W).sigma
        assert np.abs(T[:, 0, 0] - np.exp(2j * sigma)).max() < 1e-9
        assert np.abs(T[:, 1, 1] - 1).max() < 1e-9
        off.append(max(np.abs(T[:, 0, 1]).max(), np.abs(T[:, 1, 0]).max()))
    assert off[1] < 1e-8
    assert off[0] / off[1] == pytest.approx(1e3, rel=1e-3)


def test_toy_case_eigenvectors_and_gain():
    # gamma0 = 0, delta = delta_s, w = 0: diagonal of M vanishes to O(1/Dhf^2) and F = Omega^2;
    # (1, +-i) are eigenvectors with eigenvalues +-alpha0L gamma / (2 Dhf)
    p = MediumParams.from_mhz(80, 150, 0.0, omega_mhz=10).with_light_shift_cancelled()
    d = derive(p)
    r = spectral_response(p, d, [0.0])
    assert r.F[0] == pytest.approx(p.omega ** 2, rel=1e-14)
    M = r.M[0].copy()
    M[1, 1] = 0.0
    rate = p.alpha0L * p.gamma / (2 * p.delta_hf)
    for sgn in (1, -1):
        v = np.array([1.0, sgn * 1j])
        assert np.allclose(M @ v, sgn * rate * v, rtol=1e-12, atol=0)
    z = 0.7
    T = transfer_matrix(p, d, z, [0.0])[0]
    assert np.allclose(T @ np.array([1, 1j]), math.exp(rate * z) * np.array([1, 1j]), rtol=1e-12)
    assert np.allclose(T @ np.array([1, -1j]), math.exp(-rate * z) * np.array([1, -1j]), rtol=1e-12)


@pytest.mark.parametrize("z", [0.1, 0.5, 1.0])
def test_determinant_identity(fig8, z):
    p, d = fig8
    w = np.linspace(-50, 50, 4001)
    T = transfer_matrix(p, d, z, w)
    sigma = spectral_response(p, d, w).sigma
    det = T[:, 0, 0] * T[:, 1, 1] - T[:, 0, 1] * T[:, 1, 0]
    err = np.abs(det * np.exp(-2j * sigma * z) - 1)
    # det is a difference of two products; where the signal is absorbed far more
    # than the cross terms, no set of rounded entries resolves it
    cond = (np.abs(T[:, 0, 0] * T[:, 1, 1]) + np.abs(T[:, 0, 1] * T[:, 1, 0])) / np.abs(np.exp(2j * sigma * z))
    ok = cond < 1e6
    assert np.abs(w[ok]).min() == 0 and ok[np.abs(w) < 3.0].all()
    assert err[ok].max() < 1e-9
    assert np.all(err <= 100 * np.finfo(float).eps * cond)


@pytest.mark.parametrize("keep_m22", [False, True])
def test_branch_invariance(fig8, keep_m22):
    p, d = fig8
    w = np.linspace(-50, 50, 2001)
    a = transfer_matrix(p, d, 1.0, w, keep_m22=keep_m22, beta_sign=1)
    b = transfer_matrix(p, d, 1.0, w, keep_m22=keep_m22, beta_sign=-1)
    assert np.abs(a - b).max() < 1e-12 * np.abs(a).max()


@pytest.mark.parametrize("keep_m22", [False, True])
def test_transfer_matrix_against_matrix_exponential(fig8, keep_m22):
    p, d = fig8
    w = np.linspace(-3, 3, 61)
    M = spectral_response(p, d, w).M.copy()
    if not keep_m22:
        M[:, 1, 1] = 0.0
    T = transfer_matrix(p, d, 1.0, w, keep_m22=keep_m22)
    for k in range(w.size):
        assert np.allclose(T[k], expm(M[k]), rtol=1e-10, atol=1e-12)


def test_transfer_matrix_against_z_integration(fig8):
    p, d = fig8
    for wk in (-0.9, 0.0, 0.35, 2.0):
        M = spectral_response(p, d, [wk]).M[0].copy()
        M[1, 1] = 0.0
        T = transfer_matrix(p, d, 1.0, [wk])[0]
        for j in range(2):
            y0 = np.eye(2, dtype=complex)[j]
            sol = solve_ivp(lambda z, y: M @ y, (0, 1), y0, method="DOP853", rtol=1e-12, atol=1e-14)
            assert np.allclose(sol.y[:, -1], T[:, j], rtol=1e-8, atol=1e-10)


def test_singular_response_detected():
    p = MediumParams.from_mhz(10, 150, 0.0, delta_mhz=1.0, omega_mhz=0.0)
    d = derive(p)
    with pytest.raises(SingularResponseError):
        spectral_response(p, d, [-p.delta, 0.0])


def test_round_trip_at_z0(fig8):
    p, d = fig8
    pulse = PulseSpec(fwhm=6.66, stokes_ratio=-0.55)
    sp = propagate_spectral(p, d, pulse, -14, 20, z=0.0)
    assert np.abs(sp.eps_out - sp.eps_in).max() <= 1e-10 * np.abs(sp.eps_in).max()
    assert np.abs(sp.eps_prime_out - sp.eps_prime_in).max() <= 1e-10 * np.abs(sp.eps_prime_in).max()


def test_parseval():
    dt = 0.01
    t = -10 + dt * np.arange(4096)
    x = PulseSpec(fwhm=2.0, center=3.0, stokes_ratio=1.0).envelope(t) * np.exp(0.7j * t)
    a, b = parseval_energies(x, dt)
    assert abs(a - b) <= 1e-6 * a
    assert np.allclose(inverse_transform(forward_transform(x, dt), dt), x, atol=1e-14)


def test_transform_sign_convention():
    # eps(w) = integral eps(t) e^{+iwt} dt: a delay by t0 multiplies the spectrum by e^{i w t0}
    dt, n = 0.01, 4096
    t = dt * np.arange(n)
    w = 2 * np.pi * np.fft.fftfreq(n, dt)
    x = np.exp(-((t - 10) / 1.0) ** 2)
    y = np.exp(-((t - 12) / 1.0) ** 2)
    X, Y = forward_transform(x, dt), forward_transform(y, dt)
    band = np.abs(w) < 3
    assert np.allclose(Y[band], X[band] * np.exp(2j * w[band]), atol=1e-9)


def test_decoupled_signal_only_is_pure_eit():
    p = medium(80, 150, 10, delta_hf_mhz=1e12)
    d = derive(p)
    pulse = PulseSpec(fwhm=6.66, stokes_ratio=0.0)
    sp = propagate_spectral(p, d, pulse, -14, 36)
    dt = sp.t[1] - sp.t[0]
    n = sp.n_omega
    t = -14 + dt * np.arange(n)
    sigma = spectral_response(p, d, sp.omega_grid).sigma
    ref = inverse_transform(np.exp(2j * sigma) * forward_transform(pulse.envelope(t), dt), dt)[: sp.t.size]
    assert np.abs(sp.eps_out - ref).max() < 1e-9
    assert np.abs(sp.eps_prime_out).max() < 1e-7  # first order in 1/Dhf


def test_linearity(fig8):
    p, d = fig8
    pulse = PulseSpec(fwhm=6.66, stokes_ratio=0.4)
    inp = BoundaryInputs.from_pulse(pulse)
    lam = -1.2 + 0.8j
    a = propagate_spectral(p, d, inp, -14, 30)
    b = propagate_spectral(p, d, inp.scaled(lam), -14, 30)
    assert np.abs(lam * a.eps_out - b.eps_out).max() < 1e-13 * np.abs(b.eps_out).max()
    assert np.abs(lam * a.eps_prime_out - b.eps_prime_out).max() < 1e-13 * np.abs(b.eps_prime_out).max()


def test_output_is_causal(fig8):
    p, d = fig8
    pulse = PulseSpec(fwhm=2.0, center=0.0, stokes_ratio=1.0)
    sp = propagate_spectral(p, d, pulse, -30, 30)
    before = sp.t < pulse.t_start - 1.0
    assert np.abs(sp.eps_out[before]).max() < 1e-6


def test_aliasing_warning(fig8):
    p, d = fig8
    with pytest.warns(RuntimeWarning, match="outside"):
        propagate_spectral(p, d, PulseSpec(fwhm=0.02), -1, 1, bandwidth=2 * np.pi * 20)
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        propagate_spectral(p, d, PulseSpec(fwhm=6.66), -14, 20)


def test_n_omega_too_small(fig8):
    p, d = fig8
    with pytest.raises(ValueError, match="n_omega"):
        propagate_spectral(p, d, PulseSpec(fwhm=6.66), -14, 20, n_omega=128)


def test_spinwave_zero_inputs(fig8):
    p, d = fig8
    sw = spinwave_spectral(p, d, BoundaryInputs.zero(), -10, 10, [0.0, 0.5, 1.0], times=[0.0, 5.0])
    assert not np.any(sw.S)


def test_spinwave_decoupled_limit_is_dark_state():
    # Dhf -> infinity and w << Gamma: S -> -(g/Omega) eps; long pulse keeps F ~ Omega^2
    p = medium(20, 150, 30, delta_hf_mhz=1e9)
    d = derive(p)
    pulse = PulseSpec(fwhm=20.0, stokes_ratio=1.0)
    z = np.array([0.25, 0.5, 1.0])
    sw = spinwave_spectral(p, d, pulse, -45, 45, z)
    for i, zi in enumerate(z):
        sp = propagate_spectral(p, d, pulse, -45, 45, z=zi)
        eps = interp_complex(sw.t, sp.t, sp.eps_out)
        m = np.abs(eps) > 0.05 * np.abs(eps).max()
        assert relative_l2(sw.S[i][m], -(d.g / d.omega) * eps[m], magnitude=False) < 0.02


def test_spinwave_matches_time_domain_snapshot(fig4, fig4_mb):
    p, d, pulse = fig4
    _, spin = fig4_mb
    z = spin.z
    sw = spinwave_spectral(p, d, pulse, -40, 60, z, times=[spin.snapshot_grid_times[5.0]], keep_m22=True)
    S_mb = spin.snapshots[5.0][0]
    assert relative_l2(sw.S[:, 0], S_mb) < 0.02
