"""Adiabatic-elimination picture: the joint field F = eps - i (Gamma/Dhf) eps'*.

Setting d_t P = 0 gives P ~ i (Omega/Gamma) S + i (g/Gamma) eps, after which
the spin wave is driven by F alone,

    d_t S = -(Gamma0 + Omega^2/Gamma) S - g (Omega/Gamma) F,

and, with the light shift cancelled and to first order in 1/Dhf, F is carried
at the slow-light speed v(t) = Omega(t)^2 / kappa with a Stokes source,

    (d_t + v(t) d_z) F = i Delta_R(t) eps'*.

eps'* itself still obeys d_z eps'* = -i g (Omega/Dhf) S.  ``homogeneous``
mode drops the source term, so F propagates without distortion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import GridError, InstabilityError, ParameterError
from .mb_solver import BLOWUP_FACTOR, ControlLike, GridSpec, InputsLike, _as_inputs, _control_fn
from .params import DerivedRates, MediumParams

MODES = ("full", "homogeneous")


@dataclass
class JointModeRecord:
    """F and its two parts on [z, t]; ``F_out``/``stokes_out`` are z = 1 traces on ``t``.

    ``signal_part`` + ``stokes_part`` == ``F``; the Stokes part is
    -i (Gamma/Dhf) eps'* evaluated with the instantaneous Gamma(t).
    """

    mode: str
    t: np.ndarray
    z: np.ndarray
    F_out: np.ndarray
    stokes_out: np.ndarray
    t_rec: np.ndarray
    F: np.ndarray
    S: np.ndarray
    eps_prime_conj: np.ndarray
    signal_part: np.ndarray
    stokes_part: np.ndarray

    @property
    def eps(self) -> np.ndarray:
        """Signal field recovered from F and eps'*."""
        return self.signal_part


def joint_field(eps, eps_prime_conj, Gamma: complex, delta_hf: float):
    """F = eps - i (Gamma/Dhf) eps'*, broadcasting over arrays."""
    return np.asarray(eps) - 1j * (Gamma / delta_hf) * np.asarray(eps_prime_conj)


def adiabatic_P(S, eps, params: MediumParams, derived: DerivedRates,
                omega: Optional[float] = None) -> np.ndarray:
    """P ~ i (Omega/Gamma) S + i (g/Gamma) eps at constant control."""
    om = derived.omega if omega is None else float(omega)
    G = complex(params.gamma, -(params.delta - 2.0 * params.light_shift_at(om)))
    return 1j * (om / G) * np.asarray(S) + 1j * (derived.g / G) * np.asarray(eps)


def _upwind_dz(F: np.ndarray, dz: float) -> np.ndarray:
    """d_z F for rightward transport: third-order upwind-biased in the bulk.

    Point 0 is the inflow boundary (value imposed, derivative unused); point 1
    uses a central difference and the outflow point a second-order backward one.
    """
    d = np.zeros_like(F)
    d[1] = (F[2] - F[0]) / (2.0 * dz)
    d[2:-1] = (F[:-3] - 6.0 * F[1:-2] + 3.0 * F[2:-1] + 2.0 * F[3:]) / (6.0 * dz)
    d[-1] = (3.0 * F[-1] - 4.0 * F[-2] + F[-3]) / (2.0 * dz)
    return d


def _cumtrapz0(y: np.ndarray, dz: float, y0: complex) -> np.ndarray:
    out = np.empty_like(y)
    out[0] = y0
    out[1:] = y0 + 0.5 * dz * np.cumsum(y[:-1] + y[1:])
    return out


def _rates(params: MediumParams, kappa: float, om: float):
    shift = params.light_shift_at(om)
    G0 = complex(params.gamma0, -(params.delta - shift))
    G = complex(params.gamma, -(params.delta - 2.0 * shift))
    return G0, G, om * om / kappa, -om * om / params.delta_hf


def evolve_joint(
    params: MediumParams,
    derived: DerivedRates,
    inputs: InputsLike,
    control: ControlLike,
    grid: GridSpec,
    mode: str = "full",
) -> JointModeRecord:
    """Integrate F, S and eps'* by method of lines (RK4 in t).

    The time step is the largest of ``grid.dt`` or half the advective CFL
    limit dz/v_max, capped by 0.1/(Omega^2/|Gamma|) and by ``grid.trace_dt``.
    Full records are kept every ``grid.record_dt`` (default: every trace).
    """
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}")
    if abs(params.delta - derived.light_shift) > 1e-9 * max(1.0, derived.light_shift):
        raise ParameterError("the joint-mode equations assume delta = delta_s (light shift cancelled)")
    inputs = _as_inputs(inputs)
    omega_fn = _control_fn(control)
    kappa, g, dhf = derived.kappa, derived.g, params.delta_hf
    nz = grid.nz
    if nz < 4:
        raise GridError("joint-mode stencil needs nz >= 4")
    dz = 1.0 / nz
    probe = omega_fn(np.linspace(grid.t_start, grid.t_end, 4097))
    om_max = float(probe.max())
    v_max = om_max ** 2 / kappa
    rate = om_max ** 2 / params.gamma + params.gamma0
    dt_auto = min(0.5 * dz / v_max if v_max > 0 else math.inf,
                  0.1 / rate if rate > 0 else math.inf, grid.trace_dt)
    dt = dt_auto if grid.dt is None else grid.dt
    if dt * v_max / dz > 1.0:
        raise GridError(f"advective CFL number {dt * v_max / dz:.3g} exceeds 1")
    nsteps = int(math.ceil((grid.t_end - grid.t_start) / dt - 1e-9))
    dt = (grid.t_end - grid.t_start) / nsteps
    trace_every = max(1, int(round(grid.trace_dt / dt)))
    record_every = max(1, int(round(grid.record_dt / dt))) if grid.record_dt else trace_every

    t_half = grid.t_start + 0.5 * dt * np.arange(2 * nsteps + 1)
    eb = inputs.signal(t_half)
    epb = inputs.stokes(t_half)
    om_h = omega_fn(t_half)
    source = 1.0 if mode == "full" else 0.0
    peak = max(np.abs(eb).max(), np.abs(epb).max(), 1e-300)

    npts = nz + 1
    F = np.zeros(npts, complex)
    S = np.zeros(npts, complex)

    def stage(F, S, i):
        om = om_h[i]
        G0, G, v, dR = _rates(params, kappa, om)
        epc = _cumtrapz0(-1j * g * (om / dhf) * S, dz, epb[i])
        F = F.copy()
        F[0] = eb[i] - 1j * (G / dhf) * epb[i]
        dF = -v * _upwind_dz(F, dz) + source * 1j * dR * epc
        dF[0] = 0.0
        dS = -(G0 + om * om / G) * S - g * (om / G) * F
        return dF, dS, epc, F

    n_trace = nsteps // trace_every + 1
    n_rec = nsteps // record_every + 1
    F_out = np.zeros(n_trace, complex)
    st_out = np.zeros(n_trace, complex)
    rec_F = np.zeros((n_rec, npts), complex)
    rec_S = np.zeros((n_rec, npts), complex)
    rec_ep = np.zeros((n_rec, npts), complex)
    rec_G = np.zeros(n_rec, complex)

    for k in range(nsteps + 1):
        i = 2 * k
        k1F, k1S, epc, Fb = stage(F, S, i)
        F[0] = Fb[0]
        if k % trace_every == 0:
            F_out[k // trace_every] = F[-1]
            st_out[k // trace_every] = epc[-1]
        if k % record_every == 0:
            j = k // record_every
            rec_F[j], rec_S[j], rec_ep[j] = F, S, epc
            rec_G[j] = _rates(params, kappa, om_h[i])[1]
        if not np.isfinite(F[-1]) or abs(F[-1]) > BLOWUP_FACTOR * peak:
            raise InstabilityError(f"joint field blew up at t = {grid.t_start + k * dt:.4f} us")
        if k == nsteps:
            break
        k2F, k2S, _, _ = stage(F + 0.5 * dt * k1F, S + 0.5 * dt * k1S, i + 1)
        k3F, k3S, _, _ = stage(F + 0.5 * dt * k2F, S + 0.5 * dt * k2S, i + 1)
        k4F, k4S, _, Fe = stage(F + dt * k3F, S + dt * k3S, i + 2)
        F = F + dt / 6.0 * (k1F + 2.0 * (k2F + k3F) + k4F)
        S = S + dt / 6.0 * (k1S + 2.0 * (k2S + k3S) + k4S)
        F[0] = Fe[0]

    t_trace = grid.t_start + dt * trace_every * np.arange(n_trace)
    t_rec = grid.t_start + dt * record_every * np.arange(n_rec)
    Fz = rec_F.T.copy()
    epz = rec_ep.T.copy()
    stokes_part = -1j * (rec_G[None, :] / dhf) * epz
    return JointModeRecord(
        mode=mode, t=t_trace, z=np.linspace(0.0, 1.0, npts),
        F_out=F_out, stokes_out=st_out, t_rec=t_rec,
        F=Fz, S=rec_S.T.copy(), eps_prime_conj=epz,
        signal_part=Fz - stokes_part, stokes_part=stokes_part,
    )


def spinwave_from_joint(F: np.ndarray, t: np.ndarray, params: MediumParams, derived: DerivedRates,
                        control: Optional[ControlLike] = None, S0=None) -> np.ndarray:
    """Integrate d_t S = -(Gamma0 + Omega^2/Gamma) S - g (Omega/Gamma) F along t for every z.

    ``F`` is indexed [z, t] on the uniform grid ``t``; midpoint values of F are
    linear interpolants, so the result is second-order accurate in the grid step.
    """
    F = np.atleast_2d(np.asarray(F, dtype=complex))
    t = np.asarray(t, dtype=float)
    if F.shape[1] != t.size:
        raise GridError("F must be indexed [z, t] on the given time grid")
    omega_fn = _control_fn(derived.omega if control is None else control)
    S = np.zeros(F.shape, complex)
    if S0 is not None:
        S[:, 0] = S0
    g = derived.g

    def rhs(s, f, tt):
        om = float(omega_fn(np.array([tt]))[0])
        G0, G, _, _ = _rates(params, derived.kappa, om)
        return -(G0 + om * om / G) * s - g * (om / G) * f

    for n in range(t.size - 1):
        h = t[n + 1] - t[n]
        fa, fb = F[:, n], F[:, n + 1]
        fm = 0.5 * (fa + fb)
        s = S[:, n]
        k1 = rhs(s, fa, t[n])
        k2 = rhs(s + 0.5 * h * k1, fm, t[n] + 0.5 * h)
        k3 = rhs(s + 0.5 * h * k2, fm, t[n] + 0.5 * h)
        k4 = rhs(s + h * k3, fb, t[n + 1])
        S[:, n + 1] = s + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
    return S
