import math
import warnings

import numpy as np
import pytest

from eitfwm.analysis import (
    OdPoint, decay_sweep, efficiency_report, fit_decay, max_cross_correlation, od_sweep, pulse_energy,
    relative_l2, stokes_sensitivity, storage_geometry,
)
from eitfwm.exceptions import ParameterError
from eitfwm.mb_solver import GridSpec, storage_run
from eitfwm.params import MediumParams, derive
from eitfwm.pulses import ControlSchedule, PulseSpec

from conftest import medium


def test_pulse_energy_of_gaussian():
    t = np.linspace(-10, 10, 20001)
    assert pulse_energy(t, np.exp(-t ** 2)) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-9)
    assert pulse_energy(t, np.zeros_like(t)) == 0.0
    # phase does not matter
    assert pulse_energy(t, np.exp(-t ** 2 + 3j * t)) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-9)


def test_pulse_energy_windows_add_up():
    t = np.linspace(-10, 10, 20001)
    x = np.exp(-(t - 1) ** 2)
    total = pulse_energy(t, x)
    parts = pulse_energy(t, x, (-10, 0.5)) + pulse_energy(t, x, (0.5, 10))
    assert parts == pytest.approx(total, rel=1e-12)


def test_pulse_energy_window_errors():
    t = np.linspace(0, 1, 11)
    with pytest.raises(ParameterError, match="outside"):
        pulse_energy(t, t, (-1, 0.5))
    with pytest.raises(ParameterError, match="fewer than two"):
        pulse_energy(t, t, (0.51, 0.55))


def test_relative_l2():
    x = np.exp(-np.linspace(-3, 3, 101) ** 2) + 0j
    assert relative_l2(x, x) == 0.0
    assert relative_l2(1.1 * x, x) == pytest.approx(0.1)
    rotated = x * np.exp(0.4j)
    assert relative_l2(rotated, x) == pytest.approx(0.0, abs=1e-15)
    assert relative_l2(rotated, x, magnitude=False) == pytest.approx(abs(np.exp(0.4j) - 1))
    assert relative_l2(x, np.zeros_like(x)) == pytest.approx(np.linalg.norm(x))


def test_cross_correlation():
    t = np.linspace(0, 50, 5001)
    a = np.exp(-(t - 10) ** 2)
    b = 3.0 * np.exp(-(t - 30) ** 2)
    assert max_cross_correlation(a, b) == pytest.approx(1.0, abs=1e-9)
    assert max_cross_correlation(a, np.exp(-((t - 30) / 4) ** 2)) < 0.8
    assert max_cross_correlation(a, np.zeros_like(a)) == 0.0


def test_fit_decay_recovers_time_constant():
    T = np.array([5.0, 50, 100, 200, 400])
    fit = fit_decay(T, 0.7 * np.exp(-T / 300.0))
    assert fit.tau == pytest.approx(300.0, rel=1e-6)
    assert fit.amplitude == pytest.approx(0.7, rel=1e-6)
    assert fit.tau_interval[0] <= 300.0 <= fit.tau_interval[1]
    assert fit.monotonic and fit.residual < 1e-10


def test_fit_decay_order_does_not_matter():
    T = np.array([200.0, 5, 400, 50])
    a = fit_decay(T, np.exp(-T / 250.0))
    assert a.tau == pytest.approx(250.0, rel=1e-9)


def test_fit_decay_constant_data():
    fit = fit_decay([1, 2, 3, 4], [2.0] * 4)
    assert math.isinf(fit.tau) and fit.amplitude == 2.0


def test_fit_decay_warns_on_non_monotonic():
    with pytest.warns(RuntimeWarning, match="not monotonic"):
        fit = fit_decay([1, 2, 3, 4], [1.0, 0.5, 0.6, 0.2])
    assert not fit.monotonic and fit.residual > 0


def test_fit_decay_errors():
    with pytest.raises(ParameterError, match="at least 4"):
        fit_decay([1, 2, 3], [1, 0.5, 0.25])
    with pytest.raises(ParameterError, match="differ"):
        fit_decay([1, 2, 3, 4], [1, 0.5])
    with pytest.raises(ParameterError, match="positive"):
        fit_decay([1, 2, 3, 4], [1, 0.5, 0.0, 0.1])


def test_storage_geometry_centres_pulse_half_way(fig4):
    _, d, _ = fig4
    c, t0, t1 = storage_geometry(d, 6.0, t_off=1.0, storage_time=10.0)
    assert c == pytest.approx(1.0 - d.group_delay / 2)
    assert t0 < c - 2 * 6.0 and t1 > 11.0 + 2 * d.group_delay


@pytest.fixture(scope="module")
def sweeps():
    p = medium(20, 150, 10)
    d = derive(p)
    c, _, _ = storage_geometry(d, 3.0)
    pulse = PulseSpec(fwhm=3.0, center=c, stokes_ratio=1.0)
    sch = ControlSchedule(p.omega, p.omega, 0.0, 0.0)
    T = [5.0, 50.0, 100.0, 200.0]
    return p, d, decay_sweep(p, d, pulse, sch, T, nz=32), decay_sweep(p, d, pulse, sch, T, nz=32, eit_only=True)


def test_decay_sweep_recovers_spin_lifetime(sweeps):
    p, _, full, eit = sweeps
    tau_s = 1.0 / (2.0 * p.gamma0)  # energy decays at twice the coherence rate
    for fit in list(full.fits.values()) + list(eit.fits.values()):
        assert fit.tau == pytest.approx(tau_s, rel=0.01)


def test_both_channels_decay_together(sweeps):
    full = sweeps[2]
    assert np.allclose(full.normalized["signal"], full.normalized["stokes"], rtol=1e-2)


def test_eit_only_energy_budget(sweeps):
    # without FWM gain the outputs cannot carry more than the input
    eit = sweeps[3]
    eff = [r.efficiency["signal"] for r in eit.reports]
    assert all(a >= b for a, b in zip(eff, eff[1:]))
    for r in eit.reports:
        assert r.leak_energy["signal"] + r.retrieved_energy["signal"] <= r.input_energy["signal"]
        assert not r.stokes_gain and "stokes" not in r.efficiency


def test_efficiency_report_channels():
    p = medium(20, 150, 10)
    d = derive(p)
    c, t0, t1 = storage_geometry(d, 3.0, storage_time=5.0)
    pulse = PulseSpec(fwhm=3.0, center=c, stokes_ratio=0.5)
    res = storage_run(p, d, pulse, ControlSchedule(p.omega, p.omega, 0.0, 5.0), GridSpec(t0, t1, nz=32))
    rep = efficiency_report(res)
    assert rep.storage_time == pytest.approx(5.0)
    assert rep.input_energy["stokes"] == pytest.approx(0.25 * rep.input_energy["signal"], rel=1e-12)
    assert rep.efficiency["signal"] == pytest.approx(rep.retrieved_energy["signal"] / rep.input_energy["signal"])


def test_stokes_sensitivity_reference_row_and_linearity():
    p = medium(20, 145, 9.6)
    d = derive(p)
    c, t0, t1 = storage_geometry(d, 3.0, storage_time=2.0)
    pulse = PulseSpec(fwhm=3.0, center=c, stokes_ratio=1.0)
    sch = ControlSchedule(p.omega, p.omega, 0.0, 2.0)
    grid = GridSpec(t0, t1, nz=32)
    tab = stokes_sensitivity(p, d, pulse, sch, grid, [1.0, -0.55, 0.0])
    ref = tab.row(1.0)
    assert ref.leak_signal == ref.leak_stokes == ref.retrieval_signal == ref.retrieval_stokes == 0.0
    # the decomposition reproduces a direct run with r = -0.55
    direct = storage_run(p, d, PulseSpec(fwhm=3.0, center=c, stokes_ratio=-0.55), sch, grid)
    s, q = tab.traces[-0.55]
    assert np.abs(s - direct.eps_out).max() < 1e-12 * np.abs(direct.eps_out).max()
    assert np.abs(q - direct.eps_prime_out).max() < 1e-12 * np.abs(direct.eps_prime_out).max()
    with pytest.raises(KeyError):
        tab.row(2.0)
    with pytest.raises(ParameterError, match="reference"):
        stokes_sensitivity(p, d, pulse, sch, grid, [-0.55], reference=1.0)


@pytest.mark.slow
def test_od_sweep_stokes_gain_rises_with_depth():
    base = MediumParams.from_mhz(10, 145, 270e-6)
    points = [OdPoint(10, 8.3, 6), OdPoint(41, 7.1, 6), OdPoint(82, 12.7, 20), OdPoint(110, 7.8, 20)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sweep = od_sweep(base, points, storage_time=5.0, nz=32)
    rows = sweep.summary()
    gains = [r["stokes_leak_gain"] for r in rows]
    assert all(a < b for a, b in zip(gains, gains[1:]))
    assert gains[0] < 1.0 < gains[1]
    assert [r["perturbative"] for r in rows] == [True, True, True, False]
    assert [e.point for e in sweep.entries] == points
