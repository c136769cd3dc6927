"""Convolution kernels of the constant-control input/output relations.

For boundary inputs eps(0, t), eps'*(0, t):

    eps(z, t)   = (f1 + f2) * eps(0)  + f3 * eps'*(0)
    eps'*(z, t) = eps'*(0) + g2 * eps'*(0) + g3 * eps(0)
    S(z, t)     = (h1 + h2) * eps(0)  + h3 * eps'*(0)

where * is convolution in time.  Three levels of description are provided:
exact numeric inverse transforms, the finite-window closed forms (Gaussian
and error functions, valid for delta = delta_s and gamma0 -> 0, FWM to lowest
order), and the infinitely-wide-window limit where the kernels reduce to a
delta, boxes and ramps on [0, z/v_g].

Kernel values are in 1/us.  Delta functions are never sampled: they are kept
in ``KernelSet.impulses`` as (position, weight) pairs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import erf

from .exceptions import GridError, ParameterError
from .freq_solver import DEFAULT_BANDWIDTH, inverse_transform, spectral_response, transfer_matrix
from .io import write_trace_csv
from .mb_solver import InputsLike, _as_inputs
from .params import DerivedRates, MediumParams

KERNEL_NAMES = ("f1", "f2", "f3", "g2", "g3", "h1", "h2", "h3")
METHODS = ("numeric_integral", "closed_form_finite_GE", "box_limit")
MIN_N_OMEGA = 2 ** 16

Impulses = Dict[str, Tuple[Tuple[float, complex], ...]]


@dataclass(frozen=True)
class KernelSet:
    """Kernels sampled on a uniform ``t_grid`` at position ``z``."""

    t_grid: np.ndarray
    z: float
    method: str
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray
    impulses: Impulses = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ParameterError(f"unknown kernel method {self.method!r}")
        for name in ("t_grid",) + KERNEL_NAMES:
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def dt(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])

    def kernel(self, name: str) -> np.ndarray:
        if name not in KERNEL_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def impulse_list(self, name: str) -> Tuple[Tuple[float, complex], ...]:
        return self.impulses.get(name, ())

    def integral(self, name: str) -> complex:
        """Area of the kernel, impulses included."""
        k = self.kernel(name)
        area = complex(np.trapezoid(k, self.t_grid))
        return area + sum(w for _, w in self.impulse_list(name))

    def spectrum(self, name: str, omega: np.ndarray) -> np.ndarray:
        """K(w) = sum_t k(t) e^{iwt} dt + sum w_j e^{iw t_j}."""
        k = self.kernel(name)
        nz = np.nonzero(k)[0]
        out = np.zeros(np.shape(omega), dtype=complex)
        if nz.size:
            t = self.t_grid[nz]
            # chunk to bound memory
            for lo in range(0, t.size, 4096):
                sl = slice(lo, lo + 4096)
                out += np.exp(1j * np.multiply.outer(omega, t[sl])) @ (k[nz][sl] * self.dt)
        for t0, w in self.impulse_list(name):
            out += w * np.exp(1j * omega * t0)
        return out

    def export_csv(self, path) -> None:
        """One CSV: t_us then re/im columns per kernel (impulses are not sampled)."""
        write_trace_csv(path, self.t_grid, {n: self.kernel(n) for n in KERNEL_NAMES})


def default_t_grid(derived: DerivedRates, z: float, bandwidth: float = DEFAULT_BANDWIDTH) -> np.ndarray:
    """Native quadrature spacing 2 pi / B over [-z L/v_g, 3 z L/v_g] (at least +/- 2 us)."""
    dt = 2.0 * math.pi / bandwidth
    tau = max(z * derived.group_delay, 2.0)
    k0 = int(math.floor(-tau / dt))
    k1 = int(math.ceil(3.0 * tau / dt))
    return dt * np.arange(k0, k1 + 1)


def _freeze(d: Dict[str, List[Tuple[float, complex]]]) -> Impulses:
    return {k: tuple(v) for k, v in d.items() if v}


def kernels_numeric(
    params: MediumParams,
    derived: DerivedRates,
    z: float = 1.0,
    t_grid: Optional[np.ndarray] = None,
    bandwidth: float = DEFAULT_BANDWIDTH,
    n_omega: int = MIN_N_OMEGA,
    expanded_h: bool = True,
) -> KernelSet:
    """Exact kernels by discrete inverse transform over [-B/2, B/2].

    f1 is the pure-EIT part e^{2 i sigma z}; f2 = T11 - f1; g2 = T22 - 1.
    h2 and h3 use the forms expanded to lowest order in 1/Delta_hf (numerators
    vanish at w = -i Gamma0, so gamma0 > 0 keeps the integrand regular);
    ``expanded_h=False`` uses the unexpanded transforms instead.
    """
    if n_omega < MIN_N_OMEGA:
        raise GridError(f"n_omega must be at least {MIN_N_OMEGA}")
    if derived.omega <= 0:
        raise ParameterError("kernels need a nonzero control field")
    G0 = derived.Gamma0_complex
    if abs(G0) == 0.0:
        raise ParameterError("Gamma0 = 0 puts a pole on the real frequency axis; use gamma0 > 0")
    dt = 2.0 * math.pi / bandwidth
    w = 2.0 * math.pi * np.fft.fftfreq(n_omega, dt)
    resp = spectral_response(params, derived, w)
    T = transfer_matrix(params, derived, z, w)
    F, sigma = resp.F, resp.sigma
    e2 = np.exp(2j * sigma * z)
    g, Om, dhf = derived.g, derived.omega, derived.delta_hf
    b = derived.Gamma_complex - 1j * w
    u = w + 1j * G0

    spectra = {
        "f1": e2,
        "f2": T[:, 0, 0] - e2,
        "f3": T[:, 0, 1],
        "g2": T[:, 1, 1] - 1.0,
        "g3": T[:, 1, 0],
        "h1": -(g * Om / F) * e2,
    }
    if expanded_h:
        # F (1 - e2) + e2 2i Omega^2 sigma z, with 1 - e2 via expm1 to keep the cancellation clean
        num2 = -F * np.expm1(2j * sigma * z) + e2 * (2j * Om ** 2 * sigma * z)
        spectra["h2"] = g * Om ** 3 * num2 / (F * dhf ** 2 * u ** 2)
        spectra["h3"] = g * Om * (Om ** 2 * e2 - F) / (dhf * u * F)
    else:
        spectra["h2"] = -(g * Om / F) * (T[:, 0, 0] - 1j * (b / dhf) * T[:, 1, 0]) - spectra["h1"]
        spectra["h3"] = -(g * Om / F) * (T[:, 0, 1] - 1j * (b / dhf) * T[:, 1, 1])

    t_native = dt * np.fft.fftfreq(n_omega, 1.0 / n_omega)  # 0, dt, ..., then negative times
    order = np.argsort(t_native)
    t_sorted = t_native[order]
    if t_grid is None:
        t_grid = default_t_grid(derived, z, bandwidth)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] < t_sorted[0] or t_grid[-1] > t_sorted[-1]:
        raise GridError("t_grid extends beyond the quadrature window; raise n_omega")
    out = {}
    for name, K in spectra.items():
        k = inverse_transform(K, dt)[order]
        out[name] = np.interp(t_grid, t_sorted, k.real) + 1j * np.interp(t_grid, t_sorted, k.imag)
    return KernelSet(t_grid=t_grid, z=float(z), method="numeric_integral", **out)


def _check_closed_form_conditions(params: MediumParams, derived: DerivedRates) -> None:
    if derived.omega <= 0:
        raise ParameterError("kernels need a nonzero control field")
    if abs(params.delta - derived.light_shift) > 1e-9 * max(1.0, derived.light_shift):
        raise ParameterError("closed-form kernels assume delta = delta_s (light shift cancelled)")


def _gauss_erf(derived: DerivedRates, z: float, t: np.ndarray):
    tau = z * derived.group_delay
    GE = derived.gamma_E
    gauss = np.exp(-GE ** 2 * (t - tau) ** 2 / (4.0 * z))
    er = erf(GE * (tau - t) / (2.0 * math.sqrt(z)))
    sign = np.where(t >= 0.0, 1.0, -1.0)
    return tau, GE, gauss, er, sign


def kernels_closed_form(
    params: MediumParams,
    derived: DerivedRates,
    z: float = 1.0,
    t_grid: Optional[np.ndarray] = None,
) -> KernelSet:
    """Finite-window approximations: f1 Gaussian, f2/f3/g2 with error functions.

    Evaluated with gamma0 -> 0 and delta = delta_s (the latter is enforced).
    g2 carries an impulse of weight -z Delta_R^2 / Gamma_E^2 at t' = 0.
    """
    _check_closed_form_conditions(params, derived)
    if t_grid is None:
        t_grid = default_t_grid(derived, z)
    t = np.asarray(t_grid, dtype=float)
    dR = derived.delta_R
    coupling = -derived.g / derived.omega
    zeros = np.zeros(t.shape, dtype=complex)
    if z == 0.0:
        kern = {n: zeros.copy() for n in KERNEL_NAMES}
        imp = _freeze({"f1": [(0.0, 1.0 + 0j)], "h1": [(0.0, complex(coupling))]})
        return KernelSet(t_grid=t, z=0.0, method="closed_form_finite_GE", impulses=imp, **kern)
    if z < 0:
        raise ParameterError("z must be non-negative")
    tau, GE, gauss, er, sign = _gauss_erf(derived, z, t)
    f1 = GE * gauss / (2.0 * math.sqrt(math.pi * z))
    f2 = dR ** 2 * (-gauss / (2.0 * GE * math.sqrt(math.pi / z)) + 0.5 * np.abs(t) + 0.5 * t * er)
    f3 = 0.5j * dR * (sign + er)
    g2 = dR ** 2 * (gauss / (GE * math.sqrt(math.pi / z)) + 0.5 * (tau - t) * (er + sign))
    kern = {
        "f1": f1 + 0j, "f2": f2 + 0j, "f3": f3, "g2": g2 + 0j, "g3": -f3,
        "h1": coupling * f1 + 0j, "h2": coupling * f2 + 0j, "h3": coupling * f3,
    }
    imp = _freeze({"g2": [(0.0, complex(-z * dR ** 2 / GE ** 2))]})
    return KernelSet(t_grid=t, z=float(z), method="closed_form_finite_GE", impulses=imp, **kern)


@dataclass(frozen=True)
class BoxLimitKernels:
    """Infinite-window kernels as exact piecewise descriptors.

    f1 = delta(t' - tau), f2 = Delta_R^2 t' Box, f3 = i Delta_R Box,
    g2 = Delta_R^2 (tau - t') Box, g3 = -f3, h_j = (-g/Omega) f_j,
    with Box the indicator of 0 < t' < tau and tau = z L/v_g.
    """

    z: float
    tau: float
    delta_R: float
    coupling: float  # -g / Omega

    def box(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return ((t > 0.0) & (t < self.tau)).astype(float)

    def f2(self, t):
        return self.delta_R ** 2 * np.asarray(t, float) * self.box(t) + 0j

    def f3(self, t):
        return 1j * self.delta_R * self.box(t)

    def g2(self, t):
        return self.delta_R ** 2 * (self.tau - np.asarray(t, float)) * self.box(t) + 0j

    def g3(self, t):
        return -self.f3(t)

    def integrals(self) -> Dict[str, complex]:
        tau, dR = self.tau, self.delta_R
        base = {
            "f1": 1.0 + 0j,
            "f2": dR ** 2 * tau ** 2 / 2.0 + 0j,
            "f3": 1j * dR * tau,
            "g2": dR ** 2 * tau ** 2 / 2.0 + 0j,
            "g3": -1j * dR * tau,
        }
        for j in ("1", "2", "3"):
            base["h" + j] = self.coupling * base["f" + j]
        return base

    def sample(self, t_grid) -> KernelSet:
        t = np.asarray(t_grid, dtype=float)
        f2, f3 = self.f2(t), self.f3(t)
        kern = {
            "f1": np.zeros(t.shape, complex), "f2": f2, "f3": f3, "g2": self.g2(t), "g3": -f3,
            "h1": np.zeros(t.shape, complex), "h2": self.coupling * f2, "h3": self.coupling * f3,
        }
        imp = _freeze({"f1": [(self.tau, 1.0 + 0j)], "h1": [(self.tau, complex(self.coupling))]})
        return KernelSet(t_grid=t, z=self.z, method="box_limit", impulses=imp, **kern)


def kernels_box_limit(params: MediumParams, derived: DerivedRates, z: float = 1.0) -> BoxLimitKernels:
    _check_closed_form_conditions(params, derived)
    return BoxLimitKernels(
        z=float(z), tau=z * derived.group_delay, delta_R=derived.delta_R,
        coupling=-derived.g / derived.omega,
    )


@dataclass
class IOPrediction:
    t: np.ndarray
    eps: np.ndarray
    eps_prime_conj: np.ndarray
    S: np.ndarray


def _convolve(inputs_fn, t: np.ndarray, kset: KernelSet, name: str) -> np.ndarray:
    """sum_j in(t - t'_j) k(t'_j) dt' plus exact shifts for impulses."""
    k = kset.kernel(name)
    dt = kset.dt
    tk = kset.t_grid
    out = np.zeros(t.shape, dtype=complex)
    if np.any(k):
        # in(t_i - t'_j) with t_i = t0 + i dt and t'_j = tk0 + j dt lies on u_m = t0 - tk_end + m dt
        u = (t[0] - tk[-1]) + dt * np.arange(t.size + tk.size - 1)
        full = fftconvolve(inputs_fn(u), k) * dt
        out += full[tk.size - 1: tk.size - 1 + t.size]
    for t0, w in kset.impulse_list(name):
        out += w * inputs_fn(t - t0)
    return out


def io_relation(inputs: InputsLike, kernel_set, t: np.ndarray) -> IOPrediction:
    """Outputs at the kernels' z predicted by convolving the boundary inputs.

    ``kernel_set`` may be a :class:`KernelSet` or :class:`BoxLimitKernels`
    (sampled on ``t`` spacing).  ``t`` must share the kernels' time step.
    """
    inputs = _as_inputs(inputs)
    t = np.asarray(t, dtype=float)
    if isinstance(kernel_set, BoxLimitKernels):
        dt = t[1] - t[0]
        kernel_set = kernel_set.sample(dt * np.arange(-1, int(math.ceil(kernel_set.tau / dt)) + 2))
    dt_t = t[1] - t[0]
    if not np.allclose(np.diff(t), dt_t, rtol=1e-6, atol=0):
        raise GridError("output time grid must be uniform")
    if abs(dt_t - kernel_set.dt) > 1e-6 * kernel_set.dt:
        raise GridError(
            f"time step mismatch: inputs {dt_t:.6g} us vs kernels {kernel_set.dt:.6g} us"
        )
    sig, sto = inputs.signal, inputs.stokes
    c = lambda fn, name: _convolve(fn, t, kernel_set, name)
    eps = c(sig, "f1") + c(sig, "f2") + c(sto, "f3")
    epsp = sto(t) + c(sto, "g2") + c(sig, "g3")
    S = c(sig, "h1") + c(sig, "h2") + c(sto, "h3")
    return IOPrediction(t=t, eps=eps, eps_prime_conj=epsp, S=S)


def gaussian_weight(omega: np.ndarray, fwhm: float) -> np.ndarray:
    """Amplitude spectrum (peak 1) of a Gaussian pulse with intensity-free FWHM ``fwhm`` of |eps|."""
    return np.exp(-(omega * fwhm) ** 2 / (16.0 * math.log(2.0)))


def band_limited_distance(a: KernelSet, b: KernelSet, name: str, fwhm: float,
                          n_omega: int = 1025) -> float:
    """||(K_a - K_b) W|| / ||K_b W|| over w, W the pulse amplitude spectrum.

    By Parseval this equals the relative L2 distance of the two kernels after
    both are convolved with the pulse.  ``b`` is the reference.
    """
    wmax = 12.0 * math.sqrt(math.log(2.0)) / fwhm
    w = np.linspace(-wmax, wmax, n_omega)
    W = gaussian_weight(w, fwhm)
    ka = a.spectrum(name, w) * W
    kb = b.spectrum(name, w) * W
    ref = np.linalg.norm(kb)
    if ref == 0.0:
        return float(np.linalg.norm(ka))
    return float(np.linalg.norm(ka - kb) / ref)
