"""Built-in experiment specs, one per reproduced figure.

Each preset is plain spec text, so ``eitfwm show-preset NAME > my.ini`` is a
good starting point for a custom run.
"""
from __future__ import annotations

from typing import Dict, List, Tuple

from .config import ExperimentSpec, parse_spec

_PRESETS: Dict[str, Tuple[str, str]] = {}


def _register(name: str, description: str, text: str) -> None:
    _PRESETS[name] = (description, text.strip() + "\n")


_register("fig3", "spin-wave decay: retrieved energy vs storage time at alpha0L = 52", """
[experiment]
kind = decay_sweep
name = fig3

[medium]
# 70 C cell; experimental linewidth 2 gamma/2pi = 290 MHz
alpha0L = 52
gamma_mhz = 145
gamma0_mhz = 270e-6      # tau_s ~ 300 us
omega_mhz = 9.6

[pulse]
fwhm_us = 16
stokes_ratio = 1

[control]
storage_times_us = 40, 100, 200, 300, 400

[grid]
nz = 32
""")

_register("fig4", "slow light at alpha0L = 80: full solution, box limit and finite-window kernels", """
[experiment]
kind = slow_light
name = fig4
overlays = box_limit, closed_form
snapshot_times_us = 5    # spin waves 5 us after the input peak

[medium]
alpha0L = 80
gamma_mhz = 150
gamma0_mhz = 270e-6
omega_mhz = 10

[pulse]
bandwidth_gamma_e = 0.1  # 6.66 us FWHM
center_us = 0
stokes_ratio = 1

[grid]
t_start_us = -14
t_end_us = 36
nz = 64
""")

_register("fig5", "joint field F at z = L: full transport vs homogeneous, alpha0L = 10 to 100", """
[experiment]
kind = joint_mode_study
name = fig5
alpha0L_list = 10, 25, 50, 100
homogeneous_overlay = true

[medium]
alpha0L = 10
gamma_mhz = 150
gamma0_mhz = 270e-6
omega_mhz = 8

[pulse]
bandwidth_gamma_e = 0.05
center_us = 0
stokes_ratio = 1

[grid]
nz = 64
""")

_register("fig6", "Stokes leakage and retrieval for four (alpha0L, Omega, duration) settings", """
[experiment]
kind = od_sweep
name = fig6
# alpha0L : Omega/2pi (MHz) : FWHM (us)
od_points = 10:8.3:6, 41:7.1:6, 82:12.7:20, 110:7.8:20
workers = 4

[medium]
gamma_mhz = 145
gamma0_mhz = 270e-6
delta_mhz = 0            # two-photon detuning held at zero, light shift not compensated

[pulse]
fwhm_us = 6              # replaced per point
stokes_ratio = 1

[control]
storage_time_us = 100

[grid]
nz = 64
""")

_register("fig7", "Stokes-seed sensitivity at alpha0L = 52: seed ratio 1 vs -0.55", """
[experiment]
kind = sensitivity_study
name = fig7
r_values = 1, -0.55
reference_r = 1

[medium]
alpha0L = 52
gamma_mhz = 145
gamma0_mhz = 270e-6
omega_mhz = 9.6

[pulse]
fwhm_us = 15
stokes_ratio = 1

[control]
storage_time_us = 40

[grid]
nz = 64
""")

_register("fig8", "propagation kernels f, g, h at z = L for alpha0L = 80, Omega/2pi = 10 MHz", """
[experiment]
kind = kernel_study
name = fig8

[medium]
alpha0L = 80
gamma_mhz = 150
gamma0_mhz = 270e-6
omega_mhz = 10

[pulse]
bandwidth_gamma_e = 0.1  # weights the band-limited kernel distances

[grid]
kernel_z = 1
""")


def list_presets() -> List[Tuple[str, str]]:
    """(name, one-line description) for every preset, sorted by name."""
    return [(name, _PRESETS[name][0]) for name in sorted(_PRESETS)]


def preset_text(name: str) -> str:
    try:
        return _PRESETS[name][1]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(_PRESETS))}") from None


def load_preset(name: str) -> ExperimentSpec:
    return parse_spec(preset_text(name))
