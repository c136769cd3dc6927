"""Pipelines behind ``eitfwm run``: one function per experiment kind.

Every pipeline writes CSV traces and a ``summary.json`` into the output
directory through a :class:`RunContext`, which remembers each file so the
manifest can list all of them.  Sweeps fan out over a thread pool; the
compiled stepper releases the GIL, so the points really run side by side.
Results are gathered in input order, which keeps the output independent of
scheduling.
"""
from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import _backend
from .analysis import (
    OdPoint, OdSweep, decay_sweep, efficiency_report, fit_decay, max_cross_correlation, od_sweep,
    pulse_energy, relative_l2, stokes_sensitivity, storage_geometry,
)
from .config import ExperimentKind, ExperimentSpec, GridConfig, Solver
from .exceptions import ParameterError
from .freq_solver import propagate_spectral, spinwave_spectral
from .io import write_field_map_csv, write_json, write_manifest, write_trace_csv
from .jointmode import evolve_joint, joint_field
from .kernels import (
    KERNEL_NAMES, band_limited_distance, default_t_grid, io_relation, kernels_box_limit,
    kernels_closed_form, kernels_numeric,
)
from .mb_solver import GridSpec, integrate, storage_run
from .params import TWO_PI, breakdown_flag, derive

DUMP_RECORD_DT = 0.1  # us between full space-time records under --dump


@dataclass
class RunContext:
    out_dir: Path
    dump: bool = False
    log: Callable[[str], None] = lambda msg: None
    files: List[Path] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def say(self, msg: str) -> None:
        with self._lock:
            self.log(msg)

    def _keep(self, path: Path) -> Path:
        with self._lock:
            self.files.append(path)
        return path

    def trace(self, name: str, t, columns, time_label: str = "t_us") -> Path:
        return self._keep(write_trace_csv(self.out_dir / name, t, columns, time_label=time_label))

    def field_map(self, name: str, z, t, values, label: str) -> Path:
        return self._keep(write_field_map_csv(self.out_dir / name, z, t, values, label))

    def json(self, name: str, payload) -> Path:
        return self._keep(write_json(self.out_dir / name, payload))


@dataclass
class RunOutcome:
    out_dir: Path
    files: List[Path]
    summary: Dict
    manifest: Path


def _pmap(fn, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _tag(x: float) -> str:
    return f"{x:g}".replace(".", "p").replace("-", "m")


def _grid(gc: GridConfig, t0: float, t1: float, record: bool = False) -> GridSpec:
    record_dt = gc.record_dt if gc.record_dt else (DUMP_RECORD_DT if record else None)
    return GridSpec(
        t_start=gc.t_start if gc.t_start is not None else t0,
        t_end=gc.t_end if gc.t_end is not None else t1,
        nz=gc.nz, dt=gc.dt, trace_dt=gc.trace_dt, record_dt=record_dt, cfl=gc.cfl,
        fast_forward=gc.fast_forward,
    )


def _slow_window(derived, pulse, margin: float = 2.0):
    return pulse.t_start - margin, pulse.t_end + 2.5 * derived.group_delay + margin


def _interp(t_new, t, y):
    return np.interp(t_new, t, y.real) + 1j * np.interp(t_new, t, y.imag)


def _rates_summary(params, derived) -> Dict:
    b = breakdown_flag(params)
    return {
        "medium_mhz": params.to_mhz(),
        "light_shift_khz": derived.light_shift / TWO_PI * 1e3,
        "delta_R_khz": derived.delta_R / TWO_PI * 1e3,
        "v_g_over_L_khz": derived.v_g / TWO_PI * 1e3,
        "group_delay_us": derived.group_delay,
        "gamma_E_mhz": derived.gamma_E / TWO_PI,
        "fwm_strength": b.fwm_strength,
        "breakdown_threshold_alpha0L": b.threshold_alpha0L,
        "perturbative": b.valid,
    }


def _dump_records(ctx: RunContext, prefix: str, fields, spin) -> None:
    if fields.t_rec is None:
        return
    ctx.field_map(f"{prefix}_eps_map.csv", fields.z, fields.t_rec, fields.eps, "eps")
    if fields.eps_prime_conj is not None:
        ctx.field_map(f"{prefix}_eps_prime_map.csv", fields.z, fields.t_rec, fields.eps_prime_conj,
                      "eps_prime_conj")
    ctx.field_map(f"{prefix}_S_map.csv", spin.z, spin.t_rec, spin.S, "S")
    ctx.field_map(f"{prefix}_P_map.csv", spin.z, spin.t_rec, spin.P, "P")


def _field_columns(eps_in, epsp_in, eps_out, epsp_out) -> Dict[str, np.ndarray]:
    cols = {"eps_in": eps_in}
    if epsp_in is not None:
        cols["eps_prime_in"] = epsp_in
    cols["eps_out"] = eps_out
    if epsp_out is not None:
        cols["eps_prime_out"] = epsp_out
    return cols


# ---------------------------------------------------------------- slow light

def run_slow_light(spec: ExperimentSpec, ctx: RunContext) -> Dict:
    params, opts = spec.medium, spec.options
    d = derive(params)
    pulse = spec.pulse.build(d, 0.0)
    t0, t1 = _slow_window(d, pulse)
    grid = _grid(spec.grid, t0, t1, record=ctx.dump)
    bandwidth = TWO_PI * spec.grid.bandwidth_mhz
    summary: Dict = {"rates": _rates_summary(params, d), "pulse_fwhm_us": pulse.fwhm}

    def spectral():
        return propagate_spectral(params, d, pulse, grid.t_start, grid.t_end, bandwidth=bandwidth,
                                  n_omega=spec.grid.n_omega, keep_m22=opts.keep_m22)

    traces = {}
    spin = None
    if spec.solver is Solver.TIME_DOMAIN:
        ctx.say(f"time-domain run on [{grid.t_start:g}, {grid.t_end:g}] us, nz = {grid.nz}")
        fields, spin = integrate(params, d, pulse, params.omega, grid,
                                 snapshot_times=opts.snapshot_times, backend=opts.backend)
        t = fields.t
        main = (fields.eps_out, fields.eps_prime_out)
        ctx.trace("traces_time_domain.csv", t, _field_columns(
            fields.eps_in, fields.eps_prime_in, *main))
        if ctx.dump:
            _dump_records(ctx, "slow_light", fields, spin)
        if "spectral" in opts.overlays:
            traces["spectral"] = spectral()
    else:
        ctx.say("spectral run")
        sp = spectral()
        t = sp.t
        main = (sp.eps_out, sp.eps_prime_out)
        ctx.trace("traces_spectral.csv", t, _field_columns(sp.eps_in, sp.eps_prime_in, *main))
        if "time_domain" in opts.overlays:
            f2, _ = integrate(params, d, pulse, params.omega, grid, backend=opts.backend)
            traces["time_domain"] = f2

    for name, rec in traces.items():
        ctx.trace(f"traces_{name}.csv", rec.t, {"eps_out": rec.eps_out, "eps_prime_out": rec.eps_prime_out})

    # kernel overlays share the main grid spacing
    dt = t[1] - t[0]
    uniform = np.allclose(np.diff(t), dt, rtol=1e-6, atol=0)
    if ("box_limit" in opts.overlays or "closed_form" in opts.overlays) and not uniform:
        raise ParameterError("kernel overlays need a uniform output grid")
    if "box_limit" in opts.overlays:
        pred = io_relation(pulse, kernels_box_limit(params, d), t)
        traces["box_limit"] = pred
        ctx.trace("traces_box_limit.csv", t, {"eps_out": pred.eps, "eps_prime_out": pred.eps_prime_conj})
    if "closed_form" in opts.overlays:
        kset = kernels_closed_form(params, d, 1.0, t_grid=default_t_grid(d, 1.0, bandwidth=TWO_PI / dt))
        pred = io_relation(pulse, kset, t)
        traces["closed_form"] = pred
        ctx.trace("traces_closed_form.csv", t, {"eps_out": pred.eps, "eps_prime_out": pred.eps_prime_conj})
    if opts.eit_only_overlay:
        fe, _ = integrate(params, d, pulse, params.omega, grid, eit_only=True, backend=opts.backend)
        ctx.trace("traces_eit_only.csv", fe.t, {"eps_out": fe.eps_out})
        traces["eit_only"] = fe

    dist = {}
    for name, rec in traces.items():
        e = getattr(rec, "eps_out", None)
        if e is None:
            e, ep = rec.eps, rec.eps_prime_conj
        else:
            ep = getattr(rec, "eps_prime_out", None)
        te = getattr(rec, "t", t)
        entry = {"signal": relative_l2(_interp(t, te, e), main[0])}
        if ep is not None:
            entry["stokes"] = relative_l2(_interp(t, te, ep), main[1])
        dist[name] = entry
    summary["overlay_distance_vs_main"] = dist
    summary["output_energy"] = {"signal": pulse_energy(t, main[0]), "stokes": pulse_energy(t, main[1])}

    for ts in opts.snapshot_times:
        z = np.linspace(0.0, 1.0, grid.nz + 1)
        cols: Dict[str, np.ndarray] = {}
        if spin is not None:
            cols["S_time_domain"] = spin.snapshots[ts][0]
        if "spectral" in opts.overlays or spec.solver is Solver.SPECTRAL:
            sw = spinwave_spectral(params, d, pulse, grid.t_start, grid.t_end, z, times=[ts],
                                   bandwidth=bandwidth, n_omega=spec.grid.n_omega, keep_m22=opts.keep_m22)
            cols["S_spectral"] = sw.S[:, 0]
        if "box_limit" in opts.overlays:
            cols["S_box_limit"] = _spinwave_from_kernels(pulse, z, ts, dt, lambda zz: kernels_box_limit(params, d, zz))
        if "closed_form" in opts.overlays:
            cols["S_closed_form"] = _spinwave_from_kernels(pulse, z, ts, dt, lambda zz: kernels_closed_form(
                params, d, zz, t_grid=default_t_grid(d, zz, bandwidth=TWO_PI / dt)))
        path = ctx.trace(f"spinwave_t{_tag(ts)}.csv", z, cols, time_label="z")
        names = list(cols)
        summary.setdefault("spinwave_distance", {})[f"{ts:g}"] = {
            f"{a}|{b}": relative_l2(cols[a], cols[b]) for i, a in enumerate(names) for b in names[i + 1:]
        }
        ctx.say(f"spin wave at t = {ts:g} us -> {path.name}")
    return summary


def _spinwave_from_kernels(pulse, z, ts, dt, make) -> np.ndarray:
    """S(z, ts) predicted by kernel convolution; ``make(z)`` builds the kernels at each z."""
    out = np.empty(z.size, complex)
    tt = ts + dt * np.arange(-2, 3)
    for i, zz in enumerate(z):
        out[i] = io_relation(pulse, make(zz), tt).S[2]
    return out


# ---------------------------------------------------------------- storage

def _storage_setup(spec: ExperimentSpec, params, storage_time: Optional[float] = None, fwhm=None):
    d = derive(params)
    schedule = spec.control.build(params, storage_time)
    pc = spec.pulse if fwhm is None else replace(spec.pulse, fwhm=fwhm, bandwidth_gamma_e=None)
    width = pc.width_for(d)
    center, t0, t1 = storage_geometry(d, width, schedule.t_off, schedule.storage_time)
    pulse = pc.build(d, center, t_off=schedule.t_off)
    t0 = min(t0, pulse.t_start - 1.0)
    return d, schedule, pulse, t0, t1


def run_stored_light(spec: ExperimentSpec, ctx: RunContext) -> Dict:
    params, opts = spec.medium, spec.options
    d, schedule, pulse, t0, t1 = _storage_setup(spec, params)
    grid = _grid(spec.grid, t0, t1, record=ctx.dump)
    ctx.say(f"storage run: off at {schedule.t_off:g} us for {schedule.storage_time:g} us, nz = {grid.nz}")
    res = storage_run(params, d, pulse, schedule, grid, backend=opts.backend)
    f = res.fields
    ctx.trace("traces_stored.csv", res.t, _field_columns(f.eps_in, f.eps_prime_in, res.eps_out, res.eps_prime_out))
    ctx.trace("spinwave_snapshots.csv", res.z,
              {"S_off": res.S_off, "S_read": res.S_read, "P_off": res.P_off, "P_read": res.P_read},
              time_label="z")
    if ctx.dump:
        _dump_records(ctx, "stored", f, res.spin)
    rep = efficiency_report(res)
    tau = res.t_snap_read - res.t_snap_off
    expected = res.S_off * np.exp(-d.Gamma0_complex * tau)
    summary = {
        "rates": _rates_summary(params, d),
        "pulse_fwhm_us": pulse.fwhm, "pulse_center_us": pulse.center,
        "efficiency": asdict(rep),
        "snapshot_decay_error": relative_l2(res.S_read, expected, magnitude=False),
    }
    if opts.eit_only_overlay:
        re = storage_run(params, d, pulse, schedule, grid, eit_only=True, backend=opts.backend)
        ctx.trace("traces_eit_only.csv", re.t, {"eps_out": re.eps_out})
        summary["eit_only_efficiency"] = asdict(efficiency_report(re))
    if opts.slow_light_overlay:
        sg = replace(grid, t_end=grid.t_end - schedule.storage_time, record_dt=None)
        sl, _ = integrate(params, d, pulse, schedule.omega_write, sg, backend=opts.backend)
        ctx.trace("traces_slow_light.csv", sl.t, {"eps_out": sl.eps_out, "eps_prime_out": sl.eps_prime_out})
        m = sl.t > schedule.t_off
        summary["retrieval_vs_slow_light_xcorr"] = {
            "signal": max_cross_correlation(sl.eps_out[m], res.retrieval("signal")[1]),
            "stokes": max_cross_correlation(sl.eps_prime_out[m], res.retrieval("stokes")[1]),
        }
    return summary


def run_decay_sweep(spec: ExperimentSpec, ctx: RunContext) -> Dict:
    params, opts = spec.medium, spec.options
    times = sorted(spec.control.storage_times)
    d, schedule, pulse, _, _ = _storage_setup(spec, params, 0.0)

    def one(T):
        ctx.say(f"storage time {T:g} us")
        return decay_sweep(params, d, pulse, schedule, [T], nz=spec.grid.nz, backend=opts.backend).reports[0]

    reports = _pmap(one, times, opts.workers)
    cols = {}
    fits = {}
    for c in reports[0].retrieved_energy:
        e = np.array([r.retrieved_energy[c] for r in reports])
        cols[f"{c}_energy"] = e
        cols[f"{c}_normalized"] = e / e[0]
        fits[c] = asdict(fit_decay(times, e))
    ctx.trace("decay.csv", np.array(times), cols, time_label="storage_time_us")
    return {
        "rates": _rates_summary(params, d),
        "configured_tau_s_us": 1.0 / (2.0 * params.gamma0) if params.gamma0 > 0 else math.inf,
        "fits": fits,
        "reports": [asdict(r) for r in reports],
    }


def run_sensitivity(spec: ExperimentSpec, ctx: RunContext) -> Dict:
    opts = spec.options
    alphas = opts.alpha0L_list or (spec.medium.alpha0L,)

    def one(a):
        params = spec.medium.replace(alpha0L=float(a))
        if spec.cancel_light_shift:
            params = params.with_light_shift_cancelled()
        d, schedule, pulse, t0, t1 = _storage_setup(spec, params)
        grid = _grid(spec.grid, t0, t1)
        ctx.say(f"sensitivity at alpha0L = {a:g}")
        return a, params, stokes_sensitivity(params, d, pulse, schedule, grid, opts.r_values,
                                             reference=opts.reference_r, backend=opts.backend)

    results = _pmap(one, alphas, opts.workers)
    r_index = {i: {"re": r.real, "im": r.imag} for i, r in enumerate(opts.r_values)}
    tables = []
    for a, params, tab in results:
        cols = {}
        for i, r in enumerate(opts.r_values):
            s, p = tab.traces[r]
            cols[f"signal_r{i}"] = s
            cols[f"stokes_r{i}"] = p
        ctx.trace(f"sensitivity_a{_tag(a)}.csv", tab.t, cols)
        tables.append({
            "alpha0L": a, "alpha0L_gamma_over_dhf": a * params.gamma / params.delta_hf,
            "rows": [dict(asdict(row), r={"re": row.r.real, "im": row.r.imag}) for row in tab.rows],
        })
    summary = {"r_values": r_index, "reference_r": {"re": opts.reference_r.real, "im": opts.reference_r.imag},
               "tables": tables}
    if len(results) >= 3:
        x = np.log([t["alpha0L_gamma_over_dhf"] for t in tables])
        slopes = {}
        for i, r in enumerate(opts.r_values):
            if r == opts.reference_r:
                continue
            for key in ("retrieval_signal", "retrieval_stokes", "leak_signal", "leak_stokes"):
                y = np.log([t["rows"][i][key] for t in tables])
                slopes[f"r{i}_{key}"] = float(np.polyfit(x, y, 1)[0])
        summary["log_log_slopes"] = slopes
    return summary


def run_od_sweep(spec: ExperimentSpec, ctx: RunContext) -> Dict:
    opts = spec.options
    T = spec.control.storage_time

    def one(pt):
        ctx.say(f"alpha0L = {pt.alpha0L:g}, Omega/2pi = {pt.omega_mhz:g} MHz, fwhm = {pt.fwhm:g} us")
        return od_sweep(spec.medium, [OdPoint(pt.alpha0L, pt.omega_mhz, pt.fwhm)], T,
                        stokes_ratio=spec.pulse.stokes_ratio, nz=spec.grid.nz, backend=opts.backend,
                        cancel_light_shift=spec.cancel_light_shift).entries[0]

    entries = _pmap(one, list(opts.od_points), opts.workers)
    rows = []
    for i, e in enumerate(entries):
        f = e.result.fields
        ctx.trace(f"od_{i}_a{_tag(e.point.alpha0L)}.csv", e.result.t,
                  _field_columns(f.eps_in, f.eps_prime_in, e.result.eps_out, e.result.eps_prime_out))
        rows.append(e)

    return {"storage_time_us": T, "points": OdSweep(rows).summary()}


# ---------------------------------------------------------------- kernels and joint mode

_PANELS = (
    ("kernel_a_f1.csv", "f1", 1.0, False),
    ("kernel_a2_minus_h1.csv", "h1", -1.0, False),
    ("kernel_b_f2.csv", "f2", 1.0, False),
    ("kernel_b2_minus_h2.csv", "h2", -1.0, False),
    ("kernel_c_im_f3.csv", "f3", 1.0, True),
    ("kernel_c2_minus_im_h3.csv", "h3", -1.0, True),
    ("kernel_d_g2.csv", "g2", 1.0, False),
)


def run_kernel_study(spec: ExperimentSpec, ctx: RunContext) -> Dict:
    params = spec.medium
    d = derive(params)
    z = spec.grid.kernel_z
    bandwidth = TWO_PI * spec.grid.bandwidth_mhz
    kw = {"n_omega": spec.grid.n_omega} if spec.grid.n_omega else {}
    ctx.say(f"kernels at z = {z:g}")
    kn = kernels_numeric(params, d, z, bandwidth=bandwidth, **kw)
    kc = kernels_closed_form(params, d, z, t_grid=kn.t_grid)
    kb = kernels_box_limit(params, d, z).sample(kn.t_grid)
    t = kn.t_grid
    for fname, name, sign, imag in _PANELS:
        cols = {}
        for label, ks in (("numeric", kn), ("closed_form", kc), ("box_limit", kb)):
            k = sign * ks.kernel(name)
            cols[label] = k.imag if imag else k
        ctx.trace(fname, t, cols)
    path = ctx.out_dir / "kernels_numeric.csv"
    kn.export_csv(path)
    ctx._keep(path)

    def impulses(ks):
        return {n: [{"t_us": t0, "weight": w} for t0, w in ks.impulse_list(n)] for n in KERNEL_NAMES
                if ks.impulse_list(n)}

    summary = {
        "rates": _rates_summary(params, d), "z": z,
        "integrals": {label: {n: ks.integral(n) for n in KERNEL_NAMES}
                      for label, ks in (("numeric", kn), ("closed_form", kc), ("box_limit", kb))},
        "impulses": {"closed_form": impulses(kc), "box_limit": impulses(kb)},
        "peak_abs_im_f3_over_delta_R": {
            "numeric": float(np.abs(kn.f3.imag).max() / abs(d.delta_R)),
            "closed_form": float(np.abs(kc.f3.imag).max() / abs(d.delta_R)),
        },
        "max_abs_g3_plus_f3": float(np.abs(kn.g3 + kn.f3).max()),
    }
    if spec.pulse is not None:
        fw = spec.pulse.width_for(d)
        summary["band_limited_fwhm_us"] = fw
        summary["band_limited_distance"] = {
            "numeric_vs_closed_form": {n: band_limited_distance(kc, kn, n, fw) for n in KERNEL_NAMES},
            "box_limit_vs_closed_form": {n: band_limited_distance(kb, kc, n, fw) for n in KERNEL_NAMES},
        }
    return summary


def run_joint_study(spec: ExperimentSpec, ctx: RunContext) -> Dict:
    opts = spec.options
    alphas = opts.alpha0L_list or (spec.medium.alpha0L,)

    def one(a):
        params = spec.medium.replace(alpha0L=float(a))
        if spec.cancel_light_shift:
            params = params.with_light_shift_cancelled()
        d = derive(params)
        pulse = spec.pulse.build(d, 0.0)
        t0, t1 = _slow_window(d, pulse)
        grid = _grid(spec.grid, t0, t1)
        ctx.say(f"joint field at alpha0L = {a:g}")
        out = {"full": evolve_joint(params, d, pulse, params.omega, grid, "full")}
        if opts.homogeneous_overlay:
            out["homogeneous"] = evolve_joint(params, d, pulse, params.omega, grid, "homogeneous")
        if "time_domain" in opts.overlays:
            f, _ = integrate(params, d, pulse, params.omega, replace(grid, record_dt=None), backend=opts.backend)
            out["time_domain"] = (f.t, joint_field(f.eps_out, f.eps_prime_out, d.Gamma_complex, params.delta_hf))
        return a, params, d, pulse, out

    rows = []
    for a, params, d, pulse, out in _pmap(one, alphas, opts.workers):
        full = out["full"]
        cols = {"F_full": full.F_out, "stokes_full": full.stokes_out}
        row = {"alpha0L": a, "pulse_fwhm_us": pulse.fwhm, "group_delay_us": d.group_delay}
        if "homogeneous" in out:
            cols["F_homogeneous"] = out["homogeneous"].F_out
            row["divergence"] = relative_l2(out["homogeneous"].F_out, full.F_out)
        if "time_domain" in out:
            tt, F = out["time_domain"]
            cols["F_time_domain"] = _interp(full.t, tt, F)
            row["full_vs_time_domain"] = relative_l2(full.F_out, cols["F_time_domain"])
        ctx.trace(f"joint_a{_tag(a)}.csv", full.t, cols)
        rows.append(row)
    return {"rates": _rates_summary(spec.medium, derive(spec.medium)), "points": rows}


PIPELINES = {
    ExperimentKind.SLOW_LIGHT: run_slow_light,
    ExperimentKind.STORED_LIGHT: run_stored_light,
    ExperimentKind.KERNEL_STUDY: run_kernel_study,
    ExperimentKind.JOINT_MODE_STUDY: run_joint_study,
    ExperimentKind.OD_SWEEP: run_od_sweep,
    ExperimentKind.DECAY_SWEEP: run_decay_sweep,
    ExperimentKind.SENSITIVITY_STUDY: run_sensitivity,
}


def run_experiment(spec: ExperimentSpec, out_dir, dump: bool = False,
                   log: Callable[[str], None] = lambda msg: None) -> RunOutcome:
    """Run one spec; writes traces, ``summary.json`` and ``manifest.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(out_dir=out_dir, dump=dump, log=log)
    summary = PIPELINES[spec.kind](spec, ctx)
    summary = {"kind": spec.kind.value, "solver": spec.solver.value, "name": spec.options.name, **summary}
    ctx.json("summary.json", summary)
    backend = spec.options.backend or _backend.BACKEND
    manifest = write_manifest(out_dir, ctx.files, parameters=spec.echo,
                              extra={"kind": spec.kind.value, "solver": spec.solver.value,
                                     "backend": backend, "dump": dump})
    return RunOutcome(out_dir, list(ctx.files), summary, manifest)
