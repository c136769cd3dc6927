"""Time-domain integration of the full light-atom equations.

In the co-moving frame the two fields obey ODEs in z at every instant,

    d_z eps   =  i g P
    d_z eps'* = -i g (Omega/Delta_hf) S

and the atoms obey ODEs in t at every z,

    d_t S = -Gamma0 S + i Omega P + i (Omega/Delta_hf) g eps'*
    d_t P = -Gamma  P + i Omega S + i g eps

with g = sqrt(alpha0L gamma / 2) in the rescaled units of :mod:`eitfwm.params`.
Method of lines: S and P are advanced with classical RK4 in t, the fields are
rebuilt at every stage by cumulative trapezoid quadrature along z.  P is
integrated, never eliminated.

While the control is off and both boundary inputs are exactly zero, S is
decoupled (d_t S = -Gamma0 S) and P relaxes on the 1/gamma scale.  After a
settling time of ``SETTLE_DECAYS / gamma`` the remaining interval is advanced
in closed form instead of stepped, which keeps long storage times cheap.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from . import _backend
from .exceptions import GridError, InstabilityError
from .params import DerivedRates, MediumParams
from .pulses import ControlSchedule, PulseSpec

BLOWUP_FACTOR = 1.0e6
SETTLE_DECAYS = 60.0

Signal = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GridSpec:
    """Space-time discretization.

    ``dt`` defaults to ``0.8 * cfl / max(|Gamma|, Omega_max)``; an explicit
    ``dt`` violating ``dt * max(gamma, Omega, |Gamma|) < cfl`` is rejected.
    Traces at z = 1 are kept every ``trace_dt`` and full (z, t) records every
    ``record_dt`` (None keeps no full records).
    """

    t_start: float
    t_end: float
    nz: int = 64
    dt: Optional[float] = None
    trace_dt: float = 0.01
    record_dt: Optional[float] = None
    cfl: float = 0.1
    fast_forward: bool = True

    def __post_init__(self) -> None:
        if not self.t_end > self.t_start:
            raise GridError("t_end must exceed t_start")
        if self.nz < 2:
            raise GridError("nz must be at least 2")
        if self.dt is not None and self.dt <= 0:
            raise GridError("dt must be positive")

    @property
    def dz(self) -> float:
        return 1.0 / self.nz

    @property
    def z(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nz + 1)

    def resolve_dt(self, params: MediumParams, omega_max: float) -> float:
        Gamma_abs = max(params.gamma, abs(complex(params.gamma, params.delta))) + 2 * params.light_shift_at(omega_max)
        rate = max(params.gamma, omega_max, Gamma_abs)
        if self.dt is None:
            return 0.8 * self.cfl / rate
        if self.dt * rate >= self.cfl:
            raise GridError(
                f"step too large: dt*max(gamma, Omega, |Gamma|) = {self.dt * rate:.3g} >= {self.cfl}"
            )
        return self.dt

    def refined(self) -> "GridSpec":
        """Half the time step and twice the number of cells."""
        return replace(self, nz=2 * self.nz, dt=None if self.dt is None else 0.5 * self.dt,
                       cfl=self.cfl if self.dt is not None else 0.5 * self.cfl)


@dataclass
class BoundaryInputs:
    """epsilon(0, t) and epsilon'*(0, t) as callables of time."""

    signal: Signal
    stokes: Signal

    @classmethod
    def from_pulse(cls, spec: PulseSpec) -> "BoundaryInputs":
        r = complex(spec.stokes_ratio)
        return cls(spec.envelope, lambda t: r * spec.envelope(t))

    @classmethod
    def from_arrays(cls, t, signal, stokes) -> "BoundaryInputs":
        t = np.asarray(t, dtype=float)
        sig = np.asarray(signal, dtype=complex)
        sto = np.asarray(stokes, dtype=complex)

        def interp(values):
            def f(x):
                x = np.asarray(x, dtype=float)
                return (np.interp(x, t, values.real, 0.0, 0.0)
                        + 1j * np.interp(x, t, values.imag, 0.0, 0.0))
            return f

        return cls(interp(sig), interp(sto))

    @classmethod
    def zero(cls) -> "BoundaryInputs":
        return cls(lambda t: np.zeros(np.shape(t), complex), lambda t: np.zeros(np.shape(t), complex))

    def scaled(self, factor: complex) -> "BoundaryInputs":
        return BoundaryInputs(lambda t: factor * self.signal(t), lambda t: factor * self.stokes(t))


InputsLike = Union[BoundaryInputs, PulseSpec]
ControlLike = Union[ControlSchedule, float, Callable[[np.ndarray], np.ndarray]]


def _as_inputs(inputs: InputsLike) -> BoundaryInputs:
    if isinstance(inputs, PulseSpec):
        return BoundaryInputs.from_pulse(inputs)
    return inputs


def _control_fn(control: ControlLike) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(control, ControlSchedule):
        return control.at
    if callable(control):
        return lambda t: np.asarray(control(t), dtype=float)
    value = float(control)
    return lambda t: np.full(np.shape(t), value)


@dataclass
class FieldRecord:
    """Output fields.  ``eps_out``/``eps_prime_out`` are traces at z = 1 on ``t``.

    Full records ``eps``/``eps_prime_conj`` are indexed [z, t_rec] and present
    only when the grid asked for them.  In EIT-only runs the Stokes channel is
    not propagated and every Stokes array is None.
    """

    t: np.ndarray
    eps_out: np.ndarray
    eps_prime_out: Optional[np.ndarray]
    z: np.ndarray
    t_rec: Optional[np.ndarray] = None
    eps: Optional[np.ndarray] = None
    eps_prime_conj: Optional[np.ndarray] = None
    eps_in: Optional[np.ndarray] = None
    eps_prime_in: Optional[np.ndarray] = None


@dataclass
class SpinWaveRecord:
    """Atomic coherences, indexed [z, t_rec]; ``snapshots`` maps time -> (S(z), P(z))."""

    z: np.ndarray
    t_rec: Optional[np.ndarray] = None
    S: Optional[np.ndarray] = None
    P: Optional[np.ndarray] = None
    snapshots: Dict[float, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)


def _quiet_runs(omega_h, eb_h, epb_h, nsteps):
    """Maximal [ka, kb) step ranges where control and both inputs vanish identically."""
    quiet_h = (omega_h == 0.0) & (eb_h == 0) & (epb_h == 0)
    # step k is quiet when half-samples 2k, 2k+1, 2k+2 are all quiet
    q = quiet_h[0:-1:2] & quiet_h[1::2] & quiet_h[2::2]
    runs = []
    k = 0
    while k < nsteps:
        if q[k]:
            start = k
            while k < nsteps and q[k]:
                k += 1
            runs.append((start, k))
        else:
            k += 1
    return runs


def integrate(
    params: MediumParams,
    derived: DerivedRates,
    inputs: InputsLike,
    control: ControlLike,
    grid: GridSpec,
    eit_only: bool = False,
    snapshot_times: Sequence[float] = (),
    backend: Optional[str] = None,
) -> Tuple[FieldRecord, SpinWaveRecord]:
    """Integrate the signal/Stokes/atom system on ``grid``.

    ``control`` may be a :class:`ControlSchedule`, a constant Rabi frequency or
    a callable Omega(t).  ``snapshot_times`` requests copies of S and P at the
    first grid time >= each requested time.
    """
    inputs = _as_inputs(inputs)
    omega_fn = _control_fn(control)
    run = _backend.get_run_segment(backend)

    probe = omega_fn(np.linspace(grid.t_start, grid.t_end, 4097))
    if np.any(probe < 0):
        raise GridError("control Rabi frequency must be non-negative")
    dt = grid.resolve_dt(params, float(probe.max()))
    nsteps = int(math.ceil((grid.t_end - grid.t_start) / dt - 1e-9))
    t_half = grid.t_start + 0.5 * dt * np.arange(2 * nsteps + 1)
    eb_h = np.ascontiguousarray(inputs.signal(t_half), dtype=complex)
    epb_h = np.ascontiguousarray(inputs.stokes(t_half), dtype=complex)
    om_h = np.ascontiguousarray(omega_fn(t_half), dtype=float)
    if np.any(om_h < 0):
        raise GridError("control Rabi frequency must be non-negative")
    shift_h = np.ascontiguousarray((params.clebsch_ratio * om_h) ** 2 / params.delta_hf)

    trace_every = max(1, int(round(grid.trace_dt / dt)))
    record_every = max(1, int(round(grid.record_dt / dt))) if grid.record_dt else 0
    n_trace = nsteps // trace_every + 1
    n_rec = nsteps // record_every + 1 if record_every else 0
    npts = grid.nz + 1
    trace_e = np.zeros(n_trace, complex)
    trace_ep = np.zeros(n_trace, complex)
    rec = [np.zeros((n_rec, npts), complex) for _ in range(4)] if record_every else [None] * 4
    dummy = np.zeros((1, 1), complex)

    peak = max(np.abs(eb_h).max(), np.abs(epb_h).max(), 1e-300)
    blowup = BLOWUP_FACTOR * peak
    g = derived.g
    dz = grid.dz

    s = np.zeros(npts, complex)
    p = np.zeros(npts, complex)

    snap_steps = {}
    for ts in snapshot_times:
        k = int(math.ceil((ts - grid.t_start) / dt - 1e-9))
        snap_steps[min(max(k, 0), nsteps)] = ts

    settle = int(math.ceil(SETTLE_DECAYS / (params.gamma * dt)))
    ff = []
    if grid.fast_forward:
        for ka, kb in _quiet_runs(om_h, eb_h, epb_h, nsteps):
            if kb - (ka + settle) > 16:
                ff.append((ka + settle, kb))
    breaks = sorted({0, nsteps, *snap_steps, *(a for a, _ in ff), *(b for _, b in ff)})

    Gamma0_off = complex(params.gamma0, -params.delta)
    Gamma_off = complex(params.gamma, -params.delta)

    def in_ff(k):
        return any(a <= k < b for a, b in ff)

    for idx, k in enumerate(breaks):
        if k in snap_steps:
            snap_t = grid.t_start + k * dt
            sw_snap = (s.copy(), p.copy())
            snap_steps[k] = (snap_steps[k], snap_t, sw_snap)
        if k == nsteps:
            break
        k_next = breaks[idx + 1]
        last = k_next == nsteps
        if in_ff(k):
            _fast_forward(s, p, k, k_next, dt, g, dz, Gamma0_off, Gamma_off,
                          trace_every, trace_e, trace_ep, record_every, rec, last)
            continue
        fail = run(s, p, eb_h[2 * k:], epb_h[2 * k:], om_h[2 * k:], shift_h[2 * k:],
                   k, k_next - k, dt, dz, g,
                   params.gamma0, params.gamma, params.delta, params.delta_hf, bool(eit_only),
                   trace_every, trace_e, trace_ep,
                   record_every, *(r if r is not None else dummy for r in rec),
                   bool(last), blowup)
        if fail >= 0:
            t_fail = grid.t_start + (k + fail) * dt
            raise InstabilityError(
                f"field exceeded {BLOWUP_FACTOR:.0e} x peak input at t = {t_fail:.4f} us"
            )

    t_trace = grid.t_start + dt * trace_every * np.arange(n_trace)
    z = grid.z
    fields = FieldRecord(
        t=t_trace,
        eps_out=trace_e,
        eps_prime_out=None if eit_only else trace_ep,
        z=z,
        eps_in=inputs.signal(t_trace),
        eps_prime_in=None if eit_only else inputs.stokes(t_trace),
    )
    spin = SpinWaveRecord(z=z)
    if record_every:
        t_rec = grid.t_start + dt * record_every * np.arange(n_rec)
        fields.t_rec = t_rec
        fields.eps = rec[2].T.copy()
        fields.eps_prime_conj = None if eit_only else rec[3].T.copy()
        spin.t_rec = t_rec
        spin.S = rec[0].T.copy()
        spin.P = rec[1].T.copy()
    for k, entry in snap_steps.items():
        requested, actual, (S_k, P_k) = entry
        spin.snapshots[requested] = (S_k, P_k)
    spin.snapshot_grid_times = {entry[0]: entry[1] for entry in snap_steps.values()}
    return fields, spin


def _fast_forward(s, p, ka, kb, dt, g, dz, Gamma0, Gamma, trace_every, trace_e, trace_ep,
                  record_every, rec, record_last):
    """Closed-form advance through a quiet interval (control off, inputs zero)."""
    s0 = s.copy()
    p0 = p.copy()
    k_end = kb + 1 if record_last else kb
    trap_p = 0.5 * dz * np.concatenate(([0.0], np.cumsum(p0[:-1] + p0[1:])))

    def mark(every, out_fn):
        if not every:
            return
        first = -(-ka // every) * every
        ks = np.arange(first, k_end, every)
        if ks.size:
            out_fn(ks)

    def tr(ks):
        tau = (ks - ka) * dt
        trace_e[ks // trace_every] = 1j * g * trap_p[-1] * np.exp(-Gamma * tau)
        trace_ep[ks // trace_every] = 0.0

    def rc(ks):
        tau = ((ks - ka) * dt)[:, None]
        j = ks // record_every
        rec[0][j] = s0[None, :] * np.exp(-Gamma0 * tau)
        rec[1][j] = p0[None, :] * np.exp(-Gamma * tau)
        rec[2][j] = 1j * g * trap_p[None, :] * np.exp(-Gamma * tau)
        rec[3][j] = 0.0

    mark(trace_every, tr)
    mark(record_every, rc)
    tau = (kb - ka) * dt
    s *= np.exp(-Gamma0 * tau)
    p *= np.exp(-Gamma * tau)


def integrate_eit_only(params, derived, inputs, control, grid, **kwargs):
    """Same as :func:`integrate` with the Stokes channel removed from the S equation."""
    return integrate(params, derived, inputs, control, grid, eit_only=True, **kwargs)


@dataclass
class StorageResult:
    """Output of a write/store/retrieve run, split at the switching instants."""

    t: np.ndarray
    eps_out: np.ndarray
    eps_prime_out: Optional[np.ndarray]
    t_off: float
    t_on: float
    S_off: np.ndarray
    S_read: np.ndarray
    P_off: np.ndarray
    P_read: np.ndarray
    t_snap_off: float
    t_snap_read: float
    z: np.ndarray
    fields: FieldRecord = field(repr=False)
    spin: SpinWaveRecord = field(repr=False)

    @property
    def leak_mask(self) -> np.ndarray:
        return self.t < self.t_off

    @property
    def retrieval_mask(self) -> np.ndarray:
        return self.t > self.t_on

    def leak(self, channel: str = "signal") -> Tuple[np.ndarray, np.ndarray]:
        trace = self._trace(channel)
        m = self.leak_mask
        return self.t[m], trace[m]

    def retrieval(self, channel: str = "signal") -> Tuple[np.ndarray, np.ndarray]:
        trace = self._trace(channel)
        m = self.retrieval_mask
        return self.t[m], trace[m]

    def _trace(self, channel):
        if channel == "signal":
            return self.eps_out
        if channel == "stokes":
            if self.eps_prime_out is None:
                raise ValueError("Stokes channel is absent in EIT-only runs")
            return self.eps_prime_out
        raise ValueError(f"unknown channel {channel!r}")


def storage_run(
    params: MediumParams,
    derived: DerivedRates,
    inputs: InputsLike,
    schedule: ControlSchedule,
    grid: GridSpec,
    eit_only: bool = False,
    backend: Optional[str] = None,
) -> StorageResult:
    """Write, hold and retrieve; returns traces split into leakage/retrieval segments."""
    if not grid.t_start <= schedule.t_off <= grid.t_end:
        raise GridError("switch-off time lies outside the grid")
    if schedule.t_on > grid.t_end:
        raise GridError("retrieval window lies outside the grid")
    dt_probe = grid.resolve_dt(params, max(schedule.omega_write, schedule.omega_read))
    t_read_minus = schedule.t_on - dt_probe * (1.0 - 1e-6) if schedule.storage_time > 0 else schedule.t_on
    fields, spin = integrate(
        params, derived, inputs, schedule, grid, eit_only=eit_only,
        snapshot_times=(schedule.t_off, t_read_minus), backend=backend,
    )
    S_off, P_off = spin.snapshots[schedule.t_off]
    S_read, P_read = spin.snapshots[t_read_minus]
    result = StorageResult(
        t=fields.t, eps_out=fields.eps_out, eps_prime_out=fields.eps_prime_out,
        t_off=schedule.t_off, t_on=schedule.t_on,
        S_off=S_off, S_read=S_read, P_off=P_off, P_read=P_read,
        t_snap_off=spin.snapshot_grid_times[schedule.t_off],
        t_snap_read=spin.snapshot_grid_times[t_read_minus],
        z=fields.z, fields=fields, spin=spin,
    )
    t_in = fields.t
    e_in = np.trapezoid(np.abs(fields.eps_in) ** 2, t_in)
    m = result.leak_mask
    e_leak = np.trapezoid(np.abs(fields.eps_out[m]) ** 2, t_in[m]) if m.sum() > 1 else 0.0
    if e_in > 0 and e_leak > 0.99 * e_in:
        # with FWM gain the leakage can exceed the input and still leave a stored excitation
        warnings.warn(
            f"leakage carries {e_leak / e_in:.1%} of the input signal energy; "
            "the input may not have been stored (or FWM gain dominates)",
            RuntimeWarning, stacklevel=2,
        )
    return result
