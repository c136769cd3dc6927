"""Signal and Stokes pulse propagation, storage and retrieval in a double-Lambda medium.

The weak-field Maxwell-Bloch system is solved three ways: a method-of-lines
integrator in time (:mod:`mb_solver`), a transfer-matrix solver in frequency
(:mod:`freq_solver`, constant control only) and convolution kernels
(:mod:`kernels`).  :mod:`jointmode` integrates the adiabatic joint-field
picture and :mod:`analysis` holds the storage metrics and sweeps.
"""
from ._backend import BACKEND
from .analysis import (
    decay_sweep, efficiency_report, fit_decay, max_cross_correlation, od_sweep, pulse_energy,
    relative_l2, stokes_sensitivity, storage_geometry,
)
from .config import ExperimentKind, ExperimentSpec, Solver, load_spec, parse_spec
from .exceptions import (
    EitFwmError, GridError, InstabilityError, ParameterError, SingularResponseError, SolverError,
    SpecValidationError,
)
from .freq_solver import propagate_spectral, spectral_response, spinwave_spectral, transfer_matrix
from .jointmode import evolve_joint, joint_field, spinwave_from_joint
from .kernels import (
    KernelSet, io_relation, kernels_box_limit, kernels_closed_form, kernels_numeric,
)
from .mb_solver import BoundaryInputs, GridSpec, integrate, integrate_eit_only, storage_run
from .params import DerivedRates, MediumParams, breakdown_flag, derive, mhz_to_rad, rad_to_mhz
from .presets import list_presets, load_preset
from .pulses import ControlSchedule, PulseSpec, pulse_bandwidth

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoundaryInputs", "ControlSchedule", "DerivedRates", "EitFwmError", "ExperimentKind",
    "ExperimentSpec", "GridError", "GridSpec", "InstabilityError", "KernelSet", "MediumParams",
    "ParameterError", "PulseSpec", "SingularResponseError", "Solver", "SolverError",
    "SpecValidationError", "breakdown_flag", "decay_sweep", "derive", "efficiency_report",
    "evolve_joint", "fit_decay", "integrate", "integrate_eit_only", "io_relation", "joint_field",
    "kernels_box_limit", "kernels_closed_form", "kernels_numeric", "list_presets", "load_preset",
    "load_spec", "max_cross_correlation", "mhz_to_rad", "od_sweep", "parse_spec",
    "propagate_spectral", "pulse_bandwidth", "pulse_energy", "rad_to_mhz", "relative_l2",
    "spectral_response", "spinwave_from_joint", "spinwave_spectral", "stokes_sensitivity",
    "storage_geometry", "storage_run", "transfer_matrix",
]
