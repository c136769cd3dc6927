"""Physical parameters of the double-Lambda medium and the rates derived from them.

Internal unit system
--------------------
* time in microseconds, rates in rad/us (angular frequency)
* medium length normalized, z in [0, 1]
* configuration I/O in MHz of ordinary frequency; ``mhz_to_rad`` and
  ``rad_to_mhz`` are the only places the factor 2*pi enters.

The speed of light is eliminated by working in the co-moving frame and by
rescaling the atomic coherences with sqrt(c/L).  Only two combinations of the
collective coupling survive:

``kappa = alpha0L * gamma / 2``
    field gain/absorption rate per unit length (g^2 N / c in lab units),
``g = sqrt(kappa)``
    the coupling that multiplies the rescaled P and S.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .exceptions import ParameterError

TWO_PI = 2.0 * math.pi
HYPERFINE_MHZ = 6835.0  # 87Rb ground-state splitting as quoted for the experiment


def mhz_to_rad(value_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * value_mhz


def rad_to_mhz(value_rad: float) -> float:
    return value_rad / TWO_PI


@dataclass(frozen=True)
class MediumParams:
    """Validated, immutable description of the atomic medium.

    All rates are angular frequencies in rad/us.  Use :meth:`from_mhz` to
    build one from ordinary frequencies.
    """

    alpha0L: float
    gamma: float
    gamma0: float
    delta_hf: float
    delta: float = 0.0
    omega: float = 0.0
    clebsch_ratio: float = -math.sqrt(3.0)
    length_unit: float = 1.0

    def __post_init__(self) -> None:
        checks = [
            (self.alpha0L > 0, "alpha0L > 0"),
            (self.gamma > 0, "gamma > 0"),
            (self.gamma0 >= 0, "gamma0 >= 0"),
            (self.delta_hf > 0, "delta_hf > 0"),
            (self.omega >= 0, "omega >= 0"),
            (self.gamma0 < self.gamma, "gamma0 < gamma"),
            (self.length_unit == 1.0, "length_unit == 1 (z is normalized)"),
        ]
        for value in (self.alpha0L, self.gamma, self.gamma0, self.delta_hf,
                      self.delta, self.omega, self.clebsch_ratio):
            if not math.isfinite(value):
                raise ParameterError(f"non-finite parameter value {value!r}")
        for ok, name in checks:
            if not ok:
                raise ParameterError(f"invariant violated: {name}")

    @classmethod
    def from_mhz(
        cls,
        alpha0L: float,
        gamma_mhz: float,
        gamma0_mhz: float,
        delta_hf_mhz: float = HYPERFINE_MHZ,
        delta_mhz: float = 0.0,
        omega_mhz: float = 0.0,
        clebsch_ratio: float = -math.sqrt(3.0),
    ) -> "MediumParams":
        return cls(
            alpha0L=float(alpha0L),
            gamma=mhz_to_rad(gamma_mhz),
            gamma0=mhz_to_rad(gamma0_mhz),
            delta_hf=mhz_to_rad(delta_hf_mhz),
            delta=mhz_to_rad(delta_mhz),
            omega=mhz_to_rad(omega_mhz),
            clebsch_ratio=float(clebsch_ratio),
        )

    def to_mhz(self) -> dict:
        return {
            "alpha0L": self.alpha0L,
            "gamma_mhz": rad_to_mhz(self.gamma),
            "gamma0_mhz": rad_to_mhz(self.gamma0),
            "delta_hf_mhz": rad_to_mhz(self.delta_hf),
            "delta_mhz": rad_to_mhz(self.delta),
            "omega_mhz": rad_to_mhz(self.omega),
            "clebsch_ratio": self.clebsch_ratio,
        }

    def replace(self, **changes) -> "MediumParams":
        data = asdict(self)
        data.update(changes)
        return MediumParams(**data)

    def light_shift_at(self, omega: float) -> float:
        return (self.clebsch_ratio * omega) ** 2 / self.delta_hf

    def with_light_shift_cancelled(self) -> "MediumParams":
        """Copy with the two-photon detuning set to delta = delta_s."""
        return self.replace(delta=self.light_shift_at(self.omega))


@dataclass(frozen=True)
class DerivedRates:
    """Rates derived from :class:`MediumParams` at the reference Rabi frequency.

    ``group_delay`` is L/v_g; in lab units tan^2(theta) = c * group_delay / L,
    which is the only way theta enters the reduced equations.
    """

    light_shift: float
    delta_R: float
    v_g: float
    group_delay: float
    gamma_E: float
    kappa: float
    g: float
    Gamma0_complex: complex
    Gamma_complex: complex
    omega: float
    delta_hf: float
    eit: bool = True

    @property
    def g_over_omega(self) -> float:
        """Spin-wave prefactor g sqrt(N) / Omega in rescaled units."""
        return self.g / self.omega if self.eit else math.inf


def derive(params: MediumParams) -> DerivedRates:
    """Compute every derived rate of the medium.

    Omega = 0 is allowed and flagged through ``eit=False``: there is no
    transparency window, v_g = 0 and the group delay is infinite.
    """
    if not isinstance(params, MediumParams):
        raise ParameterError("derive() expects a MediumParams instance")
    omega2 = params.omega ** 2
    light_shift = params.light_shift_at(params.omega)
    delta_R = -omega2 / params.delta_hf
    kappa = 0.5 * params.alpha0L * params.gamma
    eit = params.omega > 0
    v_g = omega2 / kappa
    group_delay = kappa / omega2 if eit else math.inf
    gamma_E = omega2 / (params.gamma * math.sqrt(0.5 * params.alpha0L))
    return DerivedRates(
        light_shift=light_shift,
        delta_R=delta_R,
        v_g=v_g,
        group_delay=group_delay,
        gamma_E=gamma_E,
        kappa=kappa,
        g=math.sqrt(kappa),
        Gamma0_complex=complex(params.gamma0, -(params.delta - light_shift)),
        Gamma_complex=complex(params.gamma, -(params.delta - 2.0 * light_shift)),
        omega=params.omega,
        delta_hf=params.delta_hf,
        eit=eit,
    )


@dataclass(frozen=True)
class BreakdownReport:
    """Validity of the perturbative FWM treatment.

    ``fwm_strength`` is |Delta_R| L / v_g, which simplifies to
    alpha0L * gamma / (2 Delta_hf) and is independent of Omega.
    """

    fwm_strength: float
    valid: bool
    threshold_alpha0L: float


def breakdown_flag(params: MediumParams) -> BreakdownReport:
    strength = 0.5 * params.alpha0L * params.gamma / params.delta_hf
    return BreakdownReport(
        fwm_strength=strength,
        valid=strength < 1.0,
        threshold_alpha0L=2.0 * params.delta_hf / params.gamma,
    )
