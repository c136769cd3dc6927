"""Experiment specs: an INI file with [experiment], [medium], [pulse], [control] and [grid].

Frequencies are given in MHz of ordinary frequency, times in us.  Example::

    [experiment]
    kind = slow_light
    overlays = box_limit, closed_form

    [medium]
    alpha0L = 80
    gamma_mhz = 150
    omega_mhz = 10

    [pulse]
    bandwidth_gamma_e = 0.1
    stokes_ratio = 1

Which sections are required depends on ``kind`` (see ``REQUIRED_SECTIONS``).
Parsing collects every problem it finds and raises a single
:class:`SpecValidationError` listing them field by field.
"""
from __future__ import annotations

import builtins
import configparser
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .exceptions import ParameterError, SpecValidationError
from .params import HYPERFINE_MHZ, DerivedRates, MediumParams
from .pulses import ControlSchedule, PulseSpec, fwhm_for_bandwidth, load_custom_samples


class ExperimentKind(str, Enum):
    SLOW_LIGHT = "slow_light"
    STORED_LIGHT = "stored_light"
    KERNEL_STUDY = "kernel_study"
    JOINT_MODE_STUDY = "joint_mode_study"
    OD_SWEEP = "od_sweep"
    DECAY_SWEEP = "decay_sweep"
    SENSITIVITY_STUDY = "sensitivity_study"


class Solver(str, Enum):
    TIME_DOMAIN = "time_domain"
    SPECTRAL = "spectral"
    KERNELS = "kernels"
    JOINT = "joint"


SECTIONS = ("experiment", "medium", "pulse", "control", "grid")

REQUIRED_SECTIONS: Dict[ExperimentKind, Tuple[str, ...]] = {
    ExperimentKind.SLOW_LIGHT: ("experiment", "medium", "pulse"),
    ExperimentKind.STORED_LIGHT: ("experiment", "medium", "pulse", "control"),
    ExperimentKind.KERNEL_STUDY: ("experiment", "medium"),
    ExperimentKind.JOINT_MODE_STUDY: ("experiment", "medium", "pulse"),
    ExperimentKind.OD_SWEEP: ("experiment", "medium", "pulse", "control"),
    ExperimentKind.DECAY_SWEEP: ("experiment", "medium", "pulse", "control"),
    ExperimentKind.SENSITIVITY_STUDY: ("experiment", "medium", "pulse", "control"),
}

# first entry is the default
ALLOWED_SOLVERS: Dict[ExperimentKind, Tuple[Solver, ...]] = {
    ExperimentKind.SLOW_LIGHT: (Solver.TIME_DOMAIN, Solver.SPECTRAL),
    ExperimentKind.STORED_LIGHT: (Solver.TIME_DOMAIN,),
    ExperimentKind.KERNEL_STUDY: (Solver.KERNELS,),
    ExperimentKind.JOINT_MODE_STUDY: (Solver.JOINT,),
    ExperimentKind.OD_SWEEP: (Solver.TIME_DOMAIN,),
    ExperimentKind.DECAY_SWEEP: (Solver.TIME_DOMAIN,),
    ExperimentKind.SENSITIVITY_STUDY: (Solver.TIME_DOMAIN,),
}

OVERLAYS = ("box_limit", "closed_form", "spectral", "time_domain")

_KNOWN_KEYS = {
    "experiment": {
        "kind", "name", "solver", "output_dir", "eit_only_overlay", "homogeneous_overlay",
        "overlays", "keep_m22", "snapshot_times_us", "alpha0l_list", "od_points", "r_values",
        "reference_r", "workers", "backend", "slow_light_overlay",
    },
    "medium": {
        "alpha0l", "gamma_mhz", "gamma0_mhz", "delta_hf_mhz", "omega_mhz", "delta_mhz",
        "clebsch_ratio",
    },
    "pulse": {
        "fwhm_us", "bandwidth_gamma_e", "center_us", "amplitude", "stokes_ratio", "shape",
        "window_start_us", "window_end_us", "truncate_at_switch_off", "samples_csv",
    },
    "control": {
        "omega_write_mhz", "omega_read_mhz", "t_off_us", "storage_time_us", "ramp_us",
        "storage_times_us",
    },
    "grid": {
        "t_start_us", "t_end_us", "nz", "dt_us", "trace_dt_us", "record_dt_us", "cfl",
        "fast_forward", "bandwidth_mhz", "n_omega", "kernel_z",
    },
}


class _Reader:
    """Typed access to one INI section that records problems instead of raising."""

    def __init__(self, parser: configparser.ConfigParser, section: str, issues: list):
        self.section = section
        self.data = parser[section] if parser.has_section(section) else {}
        self.issues = issues

    def _fail(self, key, msg):
        self.issues.append((f"{self.section}.{key}", msg))

    def has(self, key) -> bool:
        return key in self.data and str(self.data[key]).strip() != ""

    def raw(self, key, default=None):
        return str(self.data[key]).strip() if self.has(key) else default

    def float(self, key, default=None, required=False, positive=False, nonneg=False):
        if not self.has(key):
            if required:
                self._fail(key, "required")
            return default
        try:
            v = float(self.data[key])
        except ValueError:
            self._fail(key, f"expected a number, got {self.data[key]!r}")
            return default
        if not math.isfinite(v):
            self._fail(key, "must be finite")
        elif positive and v <= 0:
            self._fail(key, "must be > 0")
        elif nonneg and v < 0:
            self._fail(key, "must be >= 0")
        return v

    def int(self, key, default=None, minimum=None):
        if not self.has(key):
            return default
        try:
            v = int(self.data[key])
        except ValueError:
            self._fail(key, f"expected an integer, got {self.data[key]!r}")
            return default
        if minimum is not None and v < minimum:
            self._fail(key, f"must be >= {minimum}")
        return v

    def bool(self, key, default=False):
        if not self.has(key):
            return default
        v = str(self.data[key]).strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        self._fail(key, f"expected a boolean, got {self.data[key]!r}")
        return default

    def complex(self, key, default=None):
        if not self.has(key):
            return default
        try:
            return complex(str(self.data[key]).replace(" ", ""))
        except ValueError:
            self._fail(key, f"expected a complex number such as -0.55 or 0.5+0.2j, got {self.data[key]!r}")
            return default

    def list(self, key, conv=builtins.float, default=()):
        if not self.has(key):
            return tuple(default)
        out = []
        for item in str(self.data[key]).replace("\n", ",").split(","):
            item = item.strip()
            if not item:
                continue
            try:
                out.append(conv(item.replace(" ", "")) if conv is builtins.complex else conv(item))
            except ValueError:
                self._fail(key, f"bad list entry {item!r}")
        return tuple(out)


@dataclass(frozen=True)
class PulseConfig:
    """Pulse settings before they are tied to a particular medium.

    The width may be given directly or as a fraction of the EIT window, and
    the centre may be left to the experiment (``None``), so the same config
    serves every point of a sweep.
    """

    fwhm: Optional[float] = None
    bandwidth_gamma_e: Optional[float] = None
    center: Optional[float] = None
    amplitude: complex = 1.0
    stokes_ratio: complex = 1.0
    shape: str = "truncated_gaussian"
    window: Optional[Tuple[float, float]] = None
    truncate_at_switch_off: bool = False
    samples_csv: Optional[str] = None

    def width_for(self, derived: DerivedRates) -> float:
        if self.fwhm is not None:
            return self.fwhm
        return fwhm_for_bandwidth(self.bandwidth_gamma_e * derived.gamma_E)

    def build(self, derived: DerivedRates, default_center: float = 0.0,
              t_off: Optional[float] = None) -> PulseSpec:
        fwhm = self.width_for(derived)
        center = default_center if self.center is None else self.center
        if self.shape == "custom_samples":
            return load_custom_samples(self.samples_csv, fwhm, center, self.stokes_ratio)
        window = self.window
        if window is None and self.truncate_at_switch_off and t_off is not None:
            window = (center - 2.0 * fwhm, t_off)
        return PulseSpec(fwhm=fwhm, center=center, amplitude=self.amplitude,
                         stokes_ratio=self.stokes_ratio, truncation_window=window)


@dataclass(frozen=True)
class ControlConfig:
    """Control timeline in MHz/us; ``None`` Rabi frequencies follow the medium."""

    omega_write_mhz: Optional[float] = None
    omega_read_mhz: Optional[float] = None
    t_off: float = 0.0
    storage_time: float = 0.0
    ramp: float = 0.0
    storage_times: Tuple[float, ...] = ()

    def build(self, params: MediumParams, storage_time: Optional[float] = None) -> ControlSchedule:
        w = params.omega if self.omega_write_mhz is None else 2.0 * math.pi * self.omega_write_mhz
        r = w if self.omega_read_mhz is None else 2.0 * math.pi * self.omega_read_mhz
        T = self.storage_time if storage_time is None else storage_time
        return ControlSchedule(w, r, self.t_off, T, self.ramp)


@dataclass(frozen=True)
class GridConfig:
    t_start: Optional[float] = None
    t_end: Optional[float] = None
    nz: int = 64
    dt: Optional[float] = None
    trace_dt: float = 0.01
    record_dt: Optional[float] = None
    cfl: float = 0.1
    fast_forward: bool = True
    bandwidth_mhz: float = 160.0
    n_omega: Optional[int] = None
    kernel_z: float = 1.0


@dataclass(frozen=True)
class OdPointConfig:
    alpha0L: float
    omega_mhz: float
    fwhm: float


@dataclass(frozen=True)
class ExperimentOptions:
    name: str = "experiment"
    eit_only_overlay: bool = False
    homogeneous_overlay: bool = False
    slow_light_overlay: bool = False
    overlays: Tuple[str, ...] = ()
    keep_m22: bool = False
    snapshot_times: Tuple[float, ...] = ()
    alpha0L_list: Tuple[float, ...] = ()
    od_points: Tuple[OdPointConfig, ...] = ()
    r_values: Tuple[complex, ...] = ()
    reference_r: complex = 1.0
    workers: int = 1
    backend: Optional[str] = None


@dataclass(frozen=True)
class ExperimentSpec:
    kind: ExperimentKind
    solver: Solver
    medium: MediumParams
    pulse: Optional[PulseConfig]
    control: Optional[ControlConfig]
    grid: GridConfig
    options: ExperimentOptions
    output_dir: Optional[str] = None
    cancel_light_shift: bool = True
    echo: Dict[str, Dict[str, str]] = field(default_factory=dict, compare=False)


def _parse_od_points(text: str, issues: list) -> Tuple[OdPointConfig, ...]:
    pts = []
    for item in text.replace("\n", ",").split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        try:
            a, om, fw = (float(x) for x in parts)
        except ValueError:
            issues.append(("experiment.od_points", f"entry {item!r} is not alpha0L:omega_mhz:fwhm_us"))
            continue
        if a <= 0 or om <= 0 or fw <= 0:
            issues.append(("experiment.od_points", f"entry {item!r} must be positive"))
            continue
        pts.append(OdPointConfig(a, om, fw))
    return tuple(pts)


def parse_spec(text: str, base_dir: Optional[Path] = None) -> ExperimentSpec:
    """Parse and validate spec text; relative paths resolve against ``base_dir``."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise SpecValidationError([("spec", f"not a valid INI file: {exc}")]) from exc

    issues: List[Tuple[str, str]] = []
    for sec in parser.sections():
        if sec not in SECTIONS:
            issues.append((sec, "unknown section"))
            continue
        for key in parser[sec]:
            if key not in _KNOWN_KEYS[sec]:
                issues.append((f"{sec}.{key}", "unknown key"))

    ex = _Reader(parser, "experiment", issues)
    kind = None
    if not parser.has_section("experiment"):
        issues.append(("experiment", "missing section"))
    elif not ex.has("kind"):
        issues.append(("experiment.kind", "required"))
    else:
        try:
            kind = ExperimentKind(ex.raw("kind"))
        except ValueError:
            issues.append(("experiment.kind", f"must be one of {[k.value for k in ExperimentKind]}"))
    required = REQUIRED_SECTIONS[kind] if kind else ("experiment", "medium")
    for sec in required:
        if sec != "experiment" and not parser.has_section(sec):
            issues.append((sec, f"missing section (required for {kind.value})" if kind else "missing section"))

    solver = None
    if kind is not None:
        allowed = ALLOWED_SOLVERS[kind]
        name = ex.raw("solver", allowed[0].value)
        try:
            solver = Solver(name)
        except ValueError:
            issues.append(("experiment.solver", f"must be one of {[s.value for s in Solver]}"))
        else:
            if solver not in allowed:
                issues.append(("experiment.solver",
                               f"{name} cannot run {kind.value}; use {[s.value for s in allowed]}"))

    overlays = ex.list("overlays", str)
    for o in overlays:
        if o not in OVERLAYS:
            issues.append(("experiment.overlays", f"unknown overlay {o!r}; choose from {list(OVERLAYS)}"))
    backend = ex.raw("backend")
    if backend not in (None, "auto", "cython", "python"):
        issues.append(("experiment.backend", "must be auto, cython or python"))
    od_points = _parse_od_points(ex.raw("od_points", ""), issues)
    if kind is ExperimentKind.OD_SWEEP and not od_points:
        issues.append(("experiment.od_points", "required for od_sweep (alpha0L:omega_mhz:fwhm_us, ...)"))
    r_values = ex.list("r_values", builtins.complex)
    reference_r = ex.complex("reference_r", 1.0)
    if kind is ExperimentKind.SENSITIVITY_STUDY:
        if not r_values:
            issues.append(("experiment.r_values", "required for sensitivity_study"))
        elif reference_r not in r_values:
            issues.append(("experiment.reference_r", "must be one of r_values"))
    options = ExperimentOptions(
        name=ex.raw("name", "experiment"),
        eit_only_overlay=ex.bool("eit_only_overlay"),
        homogeneous_overlay=ex.bool("homogeneous_overlay"),
        slow_light_overlay=ex.bool("slow_light_overlay"),
        overlays=overlays,
        keep_m22=ex.bool("keep_m22"),
        snapshot_times=ex.list("snapshot_times_us"),
        alpha0L_list=ex.list("alpha0l_list"),
        od_points=od_points,
        r_values=r_values,
        reference_r=reference_r,
        workers=ex.int("workers", 1, minimum=1),
        backend=None if backend in (None, "auto") else backend,
    )
    if any(a <= 0 for a in options.alpha0L_list):
        issues.append(("experiment.alpha0l_list", "entries must be > 0"))

    n_medium = len(issues)
    md = _Reader(parser, "medium", issues)
    ctl = _Reader(parser, "control", issues)
    omega_mhz = md.float("omega_mhz", nonneg=True)
    if omega_mhz is None:
        omega_mhz = ctl.float("omega_write_mhz", nonneg=True)
    if omega_mhz is None and parser.has_section("medium") and kind is not ExperimentKind.OD_SWEEP:
        issues.append(("medium.omega_mhz", "required (or give control.omega_write_mhz)"))
    sweep = kind is ExperimentKind.OD_SWEEP
    alpha0L = md.float("alpha0l", required=parser.has_section("medium") and not sweep, positive=True)
    if sweep and od_points:
        # the sweep overrides both per point; the first point stands in for the base medium
        alpha0L = od_points[0].alpha0L if alpha0L is None else alpha0L
        omega_mhz = od_points[0].omega_mhz if omega_mhz is None else omega_mhz
    gamma_mhz = md.float("gamma_mhz", required=parser.has_section("medium"), positive=True)
    gamma0_mhz = md.float("gamma0_mhz", 270e-6, nonneg=True)
    dhf_mhz = md.float("delta_hf_mhz", HYPERFINE_MHZ, positive=True)
    clebsch = md.float("clebsch_ratio", -math.sqrt(3.0))
    delta_raw = md.raw("delta_mhz", "light_shift")
    delta_mhz = None
    if delta_raw != "light_shift":
        delta_mhz = md.float("delta_mhz")

    medium = None
    if parser.has_section("medium") and None not in (alpha0L, gamma_mhz) and len(issues) == n_medium:
        try:
            medium = MediumParams.from_mhz(
                alpha0L, gamma_mhz, gamma0_mhz, omega_mhz=omega_mhz or 0.0,
                delta_hf_mhz=dhf_mhz, delta_mhz=delta_mhz or 0.0, clebsch_ratio=clebsch,
            )
            if delta_mhz is None:
                medium = medium.with_light_shift_cancelled()
        except ParameterError as exc:
            issues.append(("medium", str(exc)))

    pulse = None
    if parser.has_section("pulse"):
        pu = _Reader(parser, "pulse", issues)
        fwhm = pu.float("fwhm_us", positive=True)
        frac = pu.float("bandwidth_gamma_e", positive=True)
        if (fwhm is None) == (frac is None):
            issues.append(("pulse.fwhm_us", "give exactly one of fwhm_us or bandwidth_gamma_e"))
        shape = pu.raw("shape", "truncated_gaussian")
        samples = pu.raw("samples_csv")
        if shape not in ("truncated_gaussian", "custom_samples"):
            issues.append(("pulse.shape", "must be truncated_gaussian or custom_samples"))
        if shape == "custom_samples":
            if samples is None:
                issues.append(("pulse.samples_csv", "required for custom_samples"))
            else:
                path = Path(samples)
                if not path.is_absolute() and base_dir is not None:
                    path = Path(base_dir) / path
                if not path.is_file():
                    issues.append(("pulse.samples_csv", f"no such file {str(path)!r}"))
                samples = str(path)
        ws, we = pu.float("window_start_us"), pu.float("window_end_us")
        window = None
        if (ws is None) != (we is None):
            issues.append(("pulse.window_start_us", "give both window_start_us and window_end_us"))
        elif ws is not None:
            if ws >= we:
                issues.append(("pulse.window_end_us", "must exceed window_start_us"))
            window = (ws, we)
        center_raw = pu.raw("center_us", "auto")
        center = None if center_raw == "auto" else pu.float("center_us")
        pulse = PulseConfig(
            fwhm=fwhm, bandwidth_gamma_e=frac, center=center,
            amplitude=pu.complex("amplitude", 1.0), stokes_ratio=pu.complex("stokes_ratio", 1.0),
            shape=shape, window=window,
            truncate_at_switch_off=pu.bool("truncate_at_switch_off"), samples_csv=samples,
        )

    control = None
    if parser.has_section("control"):
        storage_times = ctl.list("storage_times_us")
        if any(T < 0 for T in storage_times):
            issues.append(("control.storage_times_us", "entries must be >= 0"))
        control = ControlConfig(
            omega_write_mhz=ctl.float("omega_write_mhz", nonneg=True),
            omega_read_mhz=ctl.float("omega_read_mhz", nonneg=True),
            t_off=ctl.float("t_off_us", 0.0),
            storage_time=ctl.float("storage_time_us", 0.0, nonneg=True),
            ramp=ctl.float("ramp_us", 0.0, nonneg=True),
            storage_times=storage_times,
        )
        if kind is ExperimentKind.DECAY_SWEEP and len(storage_times) < 4:
            issues.append(("control.storage_times_us", "decay_sweep needs at least 4 storage times"))
        if kind in (ExperimentKind.STORED_LIGHT, ExperimentKind.SENSITIVITY_STUDY, ExperimentKind.OD_SWEEP) \
                and control.storage_time <= 0:
            issues.append(("control.storage_time_us", f"must be > 0 for {kind.value}"))

    gr = _Reader(parser, "grid", issues)
    grid = GridConfig(
        t_start=gr.float("t_start_us"), t_end=gr.float("t_end_us"),
        nz=gr.int("nz", 64, minimum=4), dt=gr.float("dt_us", positive=True),
        trace_dt=gr.float("trace_dt_us", 0.01, positive=True),
        record_dt=gr.float("record_dt_us", positive=True),
        cfl=gr.float("cfl", 0.1, positive=True), fast_forward=gr.bool("fast_forward", True),
        bandwidth_mhz=gr.float("bandwidth_mhz", 160.0, positive=True),
        n_omega=gr.int("n_omega", minimum=2), kernel_z=gr.float("kernel_z", 1.0, positive=True),
    )
    if grid.t_start is not None and grid.t_end is not None and grid.t_end <= grid.t_start:
        issues.append(("grid.t_end_us", "must exceed t_start_us"))

    if issues:
        raise SpecValidationError(issues)
    echo = {sec: dict(parser[sec]) for sec in parser.sections()}
    return ExperimentSpec(
        kind=kind, solver=solver, medium=medium, pulse=pulse, control=control, grid=grid,
        options=options, output_dir=ex.raw("output_dir"),
        cancel_light_shift=delta_mhz is None, echo=echo,
    )


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecValidationError([("spec", f"cannot read {str(path)!r}: {exc.strerror}")]) from exc
    return parse_spec(text, base_dir=path.parent)
