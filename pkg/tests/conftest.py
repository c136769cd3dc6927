"""Shared media, pulses and cached solver runs.

Expensive runs are session-scoped so several test modules can inspect the
same solution.  Acceptance checks register a one-line verdict with
``record_criterion``; the lines are repeated in the terminal summary.
"""
from __future__ import annotations

import numpy as np
import pytest

from eitfwm.freq_solver import propagate_spectral
from eitfwm.mb_solver import GridSpec, integrate
from eitfwm.params import MediumParams, derive
from eitfwm.pulses import PulseSpec

_CRITERIA: list = []


def record_criterion(label: str, ok: bool, detail: str) -> str:
    line = f"{label} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    _CRITERIA.append(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)


def interp_complex(t_new, t, y):
    return np.interp(t_new, t, y.real) + 1j * np.interp(t_new, t, y.imag)


def medium(alpha0L, gamma_mhz, omega_mhz, **kw) -> MediumParams:
    """Light-shift-cancelled medium with gamma0/2pi = 270 Hz."""
    return MediumParams.from_mhz(alpha0L, gamma_mhz, 270e-6, omega_mhz=omega_mhz, **kw).with_light_shift_cancelled()


@pytest.fixture(scope="session")
def fig4():
    p = medium(80, 150, 10)
    d = derive(p)
    pulse = PulseSpec(fwhm=6.66, center=0.0, stokes_ratio=1.0)
    return p, d, pulse


@pytest.fixture(scope="session")
def fig4_mb(fig4):
    """Time-domain run at Fig 4 conditions with full records and a 5 us snapshot."""
    p, d, pulse = fig4
    return integrate(p, d, pulse, p.omega, GridSpec(-14.0, 36.0, nz=64, record_dt=0.05), snapshot_times=(5.0,))


@pytest.fixture(scope="session")
def fig4_spectral(fig4):
    p, d, pulse = fig4
    return propagate_spectral(p, d, pulse, -14.0, 36.0, keep_m22=True)
