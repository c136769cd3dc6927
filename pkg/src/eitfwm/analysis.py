"""Post-processing and sweeps: energies, efficiencies, decay fits, seed sensitivity, OD sweeps."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .exceptions import ParameterError
from .mb_solver import BoundaryInputs, GridSpec, StorageResult, storage_run
from .params import BreakdownReport, DerivedRates, MediumParams, breakdown_flag, derive
from .pulses import ControlSchedule, PulseSpec

CHANNELS = ("signal", "stokes")


def pulse_energy(t: np.ndarray, trace: np.ndarray, window: Optional[Tuple[float, float]] = None) -> float:
    """Trapezoidal integral of |trace|^2 over ``window`` (default: whole trace)."""
    t = np.asarray(t, dtype=float)
    trace = np.asarray(trace)
    if window is not None:
        lo, hi = window
        if lo < t[0] - 1e-12 or hi > t[-1] + 1e-12:
            raise ParameterError("energy window lies outside the trace")
        m = (t >= lo) & (t <= hi)
        t, trace = t[m], trace[m]
    if t.size < 2:
        raise ParameterError("energy window contains fewer than two samples")
    return float(np.trapezoid(np.abs(trace) ** 2, t))


def relative_l2(a: np.ndarray, ref: np.ndarray, magnitude: bool = True) -> float:
    """||a - ref|| / ||ref||, on moduli by default (what a photodetector sees)."""
    a = np.asarray(a)
    ref = np.asarray(ref)
    if magnitude:
        a, ref = np.abs(a), np.abs(ref)
    den = np.linalg.norm(ref)
    return float(np.linalg.norm(a - ref) / den) if den > 0 else float(np.linalg.norm(a))


def max_cross_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Peak of the normalized cross-correlation of |a| and |b| over all lags."""
    a = np.abs(np.asarray(a))
    b = np.abs(np.asarray(b))
    den = np.linalg.norm(a) * np.linalg.norm(b)
    if den == 0:
        return 0.0
    return float(np.max(np.correlate(a, b, mode="full")) / den)


@dataclass(frozen=True)
class DecayFit:
    tau: float
    amplitude: float
    residual: float
    tau_interval: Tuple[float, float]
    monotonic: bool


def fit_decay(storage_times: Sequence[float], energies: Sequence[float]) -> DecayFit:
    """Fit E = A exp(-t / tau) by linear regression of log E on t.

    A non-negative slope returns ``tau = inf``.  ``tau_interval`` is the 95%
    interval from the slope's standard error.
    """
    t = np.asarray(storage_times, dtype=float)
    e = np.asarray(energies, dtype=float)
    if t.size != e.size:
        raise ParameterError("storage_times and energies differ in length")
    if t.size < 4:
        raise ParameterError("need at least 4 storage times to fit a decay")
    if np.any(e <= 0):
        raise ParameterError("energies must be positive")
    order = np.argsort(t)
    t, e = t[order], e[order]
    y = np.log(e)
    if np.ptp(y) == 0.0:
        return DecayFit(math.inf, float(e[0]), 0.0, (math.inf, math.inf), True)
    fit = stats.linregress(t, y)
    resid = float(np.sqrt(np.mean((y - (fit.intercept + fit.slope * t)) ** 2)))
    monotonic = bool(np.all(np.diff(e) <= 0))
    if not monotonic:
        warnings.warn(f"retrieved energies are not monotonic in storage time (log residual {resid:.3g})",
                      RuntimeWarning, stacklevel=2)
    if fit.slope >= 0:
        return DecayFit(math.inf, float(math.exp(fit.intercept)), resid, (math.inf, math.inf), monotonic)
    q = stats.t.ppf(0.975, t.size - 2) * fit.stderr
    lo_slope, hi_slope = fit.slope - q, fit.slope + q
    interval = (-1.0 / lo_slope, -1.0 / hi_slope if hi_slope < 0 else math.inf)
    return DecayFit(-1.0 / fit.slope, float(math.exp(fit.intercept)), resid, interval, monotonic)


@dataclass(frozen=True)
class EfficiencyReport:
    """Per-channel energies of one storage run; efficiencies are relative to that channel's input.

    ``stokes_gain`` flags a Stokes efficiency above 1 (FWM gain), which is
    allowed only on that channel.
    """

    storage_time: float
    input_energy: Dict[str, float]
    leak_energy: Dict[str, float]
    retrieved_energy: Dict[str, float]
    efficiency: Dict[str, float]
    stokes_gain: bool


def efficiency_report(result: StorageResult, storage_time: Optional[float] = None) -> EfficiencyReport:
    t = result.t
    f = result.fields
    inp = {"signal": pulse_energy(t, f.eps_in)}
    leak = {"signal": pulse_energy(*result.leak("signal"))}
    ret = {"signal": pulse_energy(*result.retrieval("signal"))}
    if result.eps_prime_out is not None:
        inp["stokes"] = pulse_energy(t, f.eps_prime_in)
        leak["stokes"] = pulse_energy(*result.leak("stokes"))
        ret["stokes"] = pulse_energy(*result.retrieval("stokes"))
    eff = {c: (ret[c] / inp[c] if inp[c] > 0 else math.nan) for c in inp}
    return EfficiencyReport(
        storage_time=result.t_on - result.t_off if storage_time is None else storage_time,
        input_energy=inp, leak_energy=leak, retrieved_energy=ret, efficiency=eff,
        stokes_gain=bool(eff.get("stokes", 0.0) > 1.0),
    )


def storage_geometry(derived: DerivedRates, fwhm: float, t_off: float = 0.0,
                     storage_time: float = 0.0, margin: float = 2.0) -> Tuple[float, float, float]:
    """(pulse center, grid start, grid end) for a write/store/read run.

    The control is switched off when the input peak has travelled half the
    medium, i.e. the pulse is centred at t_off - (L/v_g)/2.  The read window
    lasts long enough for the stored excitation to exit (about 2 group delays
    plus a pulse width).
    """
    center = t_off - 0.5 * derived.group_delay
    t_start = center - 2.0 * fwhm - margin
    t_end = t_off + storage_time + 2.5 * derived.group_delay + 1.5 * fwhm + margin
    return center, t_start, t_end


@dataclass
class DecaySweep:
    storage_times: np.ndarray
    reports: List[EfficiencyReport]
    normalized: Dict[str, np.ndarray]
    fits: Dict[str, DecayFit]


def decay_sweep(params: MediumParams, derived: DerivedRates, pulse: PulseSpec,
                schedule: ControlSchedule, storage_times: Sequence[float], nz: int = 64,
                eit_only: bool = False, backend: Optional[str] = None) -> DecaySweep:
    """Retrieved energies against storage time, normalised to the shortest storage time, with fits."""
    times = np.sort(np.asarray(storage_times, dtype=float))
    reports = []
    for T in times:
        sch = ControlSchedule(schedule.omega_write, schedule.omega_read, schedule.t_off, float(T), schedule.ramp)
        _, t0, t1 = storage_geometry(derived, pulse.fwhm, sch.t_off, float(T))
        t0 = min(t0, pulse.t_start - 1.0)
        res = storage_run(params, derived, pulse, sch, GridSpec(t0, t1, nz=nz), eit_only=eit_only,
                          backend=backend)
        reports.append(efficiency_report(res, float(T)))
    normalized = {}
    fits = {}
    for c in reports[0].retrieved_energy:
        e = np.array([r.retrieved_energy[c] for r in reports])
        normalized[c] = e / e[0]
        if times.size >= 4:
            fits[c] = fit_decay(times, e)
    return DecaySweep(times, reports, normalized, fits)


@dataclass(frozen=True)
class SensitivityRow:
    r: complex
    leak_signal: float
    leak_stokes: float
    retrieval_signal: float
    retrieval_stokes: float


@dataclass
class SensitivityTable:
    reference_r: complex
    rows: List[SensitivityRow]
    traces: Dict[complex, Tuple[np.ndarray, np.ndarray]] = field(repr=False)
    t: np.ndarray = field(repr=False)
    t_off: float = 0.0
    t_on: float = 0.0

    def row(self, r) -> SensitivityRow:
        for row in self.rows:
            if row.r == r:
                return row
        raise KeyError(r)


def stokes_sensitivity(params: MediumParams, derived: DerivedRates, pulse: PulseSpec,
                       schedule: ControlSchedule, grid: GridSpec, r_values: Sequence[complex],
                       reference: complex = 1.0, backend: Optional[str] = None) -> SensitivityTable:
    """Relative L2 change of each output segment when the Stokes seed ratio changes from ``reference``.

    The equations are linear, so the outputs for any seed ratio r are
    out_signal_only + r * out_stokes_only; two solver runs cover every r.
    """
    if reference not in list(r_values):
        raise ParameterError("r_values must include the reference ratio")
    base = BoundaryInputs.from_pulse(pulse)
    sig_only = BoundaryInputs(base.signal, lambda t: np.zeros(np.shape(t), complex))
    unit = PulseSpec(fwhm=pulse.fwhm, center=pulse.center, amplitude=pulse.amplitude, stokes_ratio=1.0,
                     shape=pulse.shape, truncation_window=pulse.truncation_window,
                     samples_t=pulse.samples_t, samples_values=pulse.samples_values)
    sto_only = BoundaryInputs(lambda t: np.zeros(np.shape(t), complex), BoundaryInputs.from_pulse(unit).stokes)
    ra = storage_run(params, derived, sig_only, schedule, grid, backend=backend)
    rb = storage_run(params, derived, sto_only, schedule, grid, backend=backend)
    t = ra.t
    leak = t < schedule.t_off
    retr = t > schedule.t_on
    traces = {}
    for r in r_values:
        traces[r] = (ra.eps_out + r * rb.eps_out, ra.eps_prime_out + r * rb.eps_prime_out)
    ref_s, ref_p = traces[reference]
    rows = []
    for r in r_values:
        s, p = traces[r]
        rows.append(SensitivityRow(
            r=r,
            leak_signal=relative_l2(s[leak], ref_s[leak]),
            leak_stokes=relative_l2(p[leak], ref_p[leak]),
            retrieval_signal=relative_l2(s[retr], ref_s[retr]),
            retrieval_stokes=relative_l2(p[retr], ref_p[retr]),
        ))
    return SensitivityTable(reference, rows, traces, t, schedule.t_off, schedule.t_on)


@dataclass(frozen=True)
class OdPoint:
    alpha0L: float
    omega_mhz: float
    fwhm: float


@dataclass
class OdSweepEntry:
    point: OdPoint
    params: MediumParams
    breakdown: BreakdownReport
    result: StorageResult
    report: EfficiencyReport


@dataclass
class OdSweep:
    entries: List[OdSweepEntry]

    def summary(self) -> List[Dict[str, float]]:
        rows = []
        for e in self.entries:
            rep = e.report
            rows.append({
                "alpha0L": e.point.alpha0L,
                "omega_mhz": e.point.omega_mhz,
                "fwhm_us": e.point.fwhm,
                "fwm_strength": e.breakdown.fwm_strength,
                "perturbative": e.breakdown.valid,
                "stokes_retrieved_energy": rep.retrieved_energy.get("stokes", math.nan),
                "stokes_leak_gain": rep.leak_energy.get("stokes", math.nan) / rep.input_energy.get("stokes", math.nan),
                "signal_efficiency": rep.efficiency["signal"],
            })
        return rows


def od_sweep(base: MediumParams, points: Sequence[OdPoint], storage_time: float,
             stokes_ratio: complex = 1.0, nz: int = 64, backend: Optional[str] = None,
             cancel_light_shift: bool = False) -> OdSweep:
    """One storage run per (alpha0L, Omega, fwhm) point, in input order.

    ``base`` supplies gamma, gamma0, Delta_hf and the two-photon detuning;
    alpha0L and Omega are overridden per point.  With ``cancel_light_shift``
    the detuning is reset to each point's own light shift instead.
    """
    entries = []
    for pt in points:
        params = base.replace(alpha0L=float(pt.alpha0L), omega=2.0 * math.pi * pt.omega_mhz)
        if cancel_light_shift:
            params = params.with_light_shift_cancelled()
        derived = derive(params)
        center, t0, t1 = storage_geometry(derived, pt.fwhm, 0.0, storage_time)
        pulse = PulseSpec(fwhm=pt.fwhm, center=center, stokes_ratio=stokes_ratio)
        schedule = ControlSchedule(params.omega, params.omega, 0.0, storage_time)
        res = storage_run(params, derived, pulse, schedule, GridSpec(t0, t1, nz=nz), backend=backend)
        entries.append(OdSweepEntry(pt, params, breakdown_flag(params), res, efficiency_report(res, storage_time)))
    return OdSweep(entries)
