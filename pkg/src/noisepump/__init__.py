"""Qubit dynamics under a thermal bath plus injected classical colored noise."""

from .dynamics import BlochTrajectory, energy_difference, evolve, steady_state_nz
from .errors import (
    ConfigError,
    ConvergenceError,
    NoisePumpError,
    NumericalFailure,
    ParameterError,
)
from .measures import MeasureReport, achl_measure, blp_qubit_measure, rhp_from_achl
from .noise import NoiseKernel, eta_asymptote, eta_curve, eta_min
from .thermal import SystemParams, markovianity_temperature, rate_table, threshold_amplitude

__version__ = "0.1.0"

__all__ = [
    "BlochTrajectory",
    "ConfigError",
    "ConvergenceError",
    "MeasureReport",
    "NoiseKernel",
    "NoisePumpError",
    "NumericalFailure",
    "ParameterError",
    "SystemParams",
    "achl_measure",
    "blp_qubit_measure",
    "energy_difference",
    "eta_asymptote",
    "eta_curve",
    "eta_min",
    "evolve",
    "markovianity_temperature",
    "rate_table",
    "rhp_from_achl",
    "steady_state_nz",
    "threshold_amplitude",
]
