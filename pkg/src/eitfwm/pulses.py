"""Input envelopes for the signal/Stokes channels and the control-field timeline.

Time origin convention: t = 0 is the instant the control field is switched
off, so leakage is t < 0 and retrieval is t > storage_time.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .exceptions import GridError, ParameterError

MIN_SAMPLES_PER_FWHM = 16


@dataclass(frozen=True)
class PulseSpec:
    """Boundary envelope of the signal field; the Stokes seed is ``stokes_ratio`` times it.

    ``fwhm`` is the full width at half maximum of |epsilon(0, t)|.  Outside
    ``truncation_window`` the envelope is exactly zero.  The default window is
    center +/- 2 fwhm.
    """

    fwhm: float
    center: float = 0.0
    amplitude: complex = 1.0
    stokes_ratio: complex = 1.0
    shape: str = "truncated_gaussian"
    truncation_window: Optional[Tuple[float, float]] = None
    samples_t: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    samples_values: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.shape not in ("truncated_gaussian", "custom_samples"):
            raise ParameterError(f"unknown pulse shape {self.shape!r}")
        if not self.fwhm > 0:
            raise ParameterError("invariant violated: fwhm > 0")
        if self.truncation_window is None:
            object.__setattr__(
                self, "truncation_window",
                (self.center - 2.0 * self.fwhm, self.center + 2.0 * self.fwhm),
            )
        lo, hi = self.truncation_window
        if not lo <= self.center <= hi:
            raise ParameterError("invariant violated: truncation_window contains center")
        if self.shape == "custom_samples":
            if self.samples_t is None or self.samples_values is None:
                raise ParameterError("custom_samples shape needs samples_t and samples_values")
            if len(self.samples_t) != len(self.samples_values) or len(self.samples_t) < 2:
                raise ParameterError("custom samples must be two equal-length arrays (>= 2 points)")

    @property
    def t_start(self) -> float:
        return self.truncation_window[0]

    @property
    def t_end(self) -> float:
        return self.truncation_window[1]

    def envelope(self, t) -> np.ndarray:
        """Signal envelope epsilon(0, t) evaluated at arbitrary times."""
        t = np.asarray(t, dtype=float)
        lo, hi = self.truncation_window
        inside = (t >= lo) & (t <= hi)
        out = np.zeros(t.shape, dtype=complex)
        if self.shape == "truncated_gaussian":
            x = (t[inside] - self.center) / self.fwhm
            out[inside] = self.amplitude * np.exp(-4.0 * math.log(2.0) * x * x)
        else:
            ts = np.asarray(self.samples_t, dtype=float)
            vs = np.asarray(self.samples_values, dtype=complex)
            ti = t[inside]
            out[inside] = np.interp(ti, ts, vs.real, 0.0, 0.0) + 1j * np.interp(ti, ts, vs.imag, 0.0, 0.0)
        return out


def load_custom_samples(path, fwhm: float, center: float, stokes_ratio: complex = 1.0) -> PulseSpec:
    """Read a CSV with columns ``t, re, im`` into a custom-shape PulseSpec."""
    rows = []
    with open(Path(path), newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row[:3]])
            except ValueError:
                continue  # header line
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ParameterError(f"{path}: expected three numeric columns t, re, im")
    values = data[:, 1] + 1j * data[:, 2]
    return PulseSpec(
        fwhm=fwhm, center=center, amplitude=complex(np.max(np.abs(values))),
        stokes_ratio=stokes_ratio, shape="custom_samples",
        truncation_window=(float(data[0, 0]), float(data[-1, 0])),
        samples_t=data[:, 0], samples_values=values,
    )


def sample_inputs(spec: PulseSpec, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Boundary arrays epsilon(0, t_i) and epsilon'*(0, t_i) on a uniform grid."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise GridError("time grid must be a 1-D array with at least two samples")
    dt = t[1] - t[0]
    if spec.fwhm / dt < MIN_SAMPLES_PER_FWHM:
        raise GridError(
            f"grid too coarse: {spec.fwhm / dt:.1f} samples per FWHM, need {MIN_SAMPLES_PER_FWHM}"
        )
    if t[0] > spec.t_start or t[-1] < spec.t_end:
        raise GridError("time grid does not cover the truncation window")
    eps = spec.envelope(t)
    return eps, spec.stokes_ratio * eps


@dataclass(frozen=True)
class ControlSchedule:
    """Write/store/retrieve timeline of the control Rabi frequency (rad/us).

    With ``ramp`` > 0 the switch-off ramps linearly to zero over
    [t_off - ramp, t_off] and the switch-on ramps up over [t_on - ramp, t_on],
    so each ramp belongs to the earlier segment.
    """

    omega_write: float
    omega_read: Optional[float] = None
    t_off: float = 0.0
    storage_time: float = 0.0
    ramp: float = 0.0

    def __post_init__(self) -> None:
        if self.omega_read is None:
            object.__setattr__(self, "omega_read", self.omega_write)
        if self.omega_write < 0 or self.omega_read < 0:
            raise ParameterError("invariant violated: Omega(t) >= 0")
        if self.storage_time < 0 or self.ramp < 0:
            raise ParameterError("storage_time and ramp must be non-negative")
        if self.storage_time > 0 and self.ramp > self.storage_time:
            raise ParameterError("ramp longer than the storage interval")

    @property
    def t_on(self) -> float:
        return self.t_off + self.storage_time

    @property
    def switch_model(self) -> str:
        return "linear_ramp" if self.ramp > 0 else "instantaneous"

    @property
    def is_constant(self) -> bool:
        return self.storage_time == 0 and self.omega_read == self.omega_write

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.is_constant:
            return np.full(t.shape, float(self.omega_write))
        if self.storage_time == 0:
            return np.where(t < self.t_off, self.omega_write, self.omega_read).astype(float)
        out = np.zeros(t.shape, dtype=float)
        if self.ramp == 0:
            out[t < self.t_off] = self.omega_write
            out[t >= self.t_on] = self.omega_read
            return out
        r = self.ramp
        out[t <= self.t_off - r] = self.omega_write
        down = (t > self.t_off - r) & (t < self.t_off)
        out[down] = self.omega_write * (self.t_off - t[down]) / r
        up = (t > self.t_on - r) & (t < self.t_on)
        out[up] = self.omega_read * (t[up] - (self.t_on - r)) / r
        out[t >= self.t_on] = self.omega_read
        return out


def sample_control(schedule: ControlSchedule, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not schedule.is_constant and not (t[0] <= schedule.t_off <= t[-1]):
        raise GridError("control switch-off time lies outside the time grid")
    return schedule.at(t)


def pulse_bandwidth(spec: PulseSpec) -> float:
    """Bandwidth (rad/us) associated with a Gaussian pulse of the given FWHM.

    Uses the transform-limited time-bandwidth product 2 ln2 / pi ~= 0.441,
    under which a 6.66 us pulse has a bandwidth of 0.1 Gamma_E for
    Omega/2pi = 10 MHz, gamma/2pi = 150 MHz and alpha0L = 80.
    """
    if spec.shape != "truncated_gaussian":
        raise ParameterError("pulse_bandwidth is only defined for truncated_gaussian pulses")
    return 2.0 * math.log(2.0) / (math.pi * spec.fwhm)


def fwhm_for_bandwidth(bandwidth: float) -> float:
    """Inverse of :func:`pulse_bandwidth`."""
    if bandwidth <= 0:
        raise ParameterError("bandwidth must be positive")
    return 2.0 * math.log(2.0) / (math.pi * bandwidth)


def uniform_grid(t_start: float, t_end: float, dt: float) -> np.ndarray:
    n = int(math.ceil((t_end - t_start) / dt - 1e-9))
    return t_start + dt * np.arange(n + 1)
