"""Entanglement between two masses coupled by a central potential.

The top level re-exports the pieces most scripts need; submodules hold the
rest (``centralent.tdse`` for the wave-packet solver, ``centralent.oracles``
for independent reference values).
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("centralent")
except PackageNotFoundError:  # running from a source tree without metadata
    __version__ = "0.1.0"

from .config import ConfigError, ExperimentConfig, characteristic_frequencies
from .gaussian import CovarianceState, MomentSet, covariance_lab, reduced_moments_quadratic
from .measures import NonPhysicalCovariance, gaussian_entropy, log_negativity, symplectic_spectrum
from .potentials import expand, gravity_interaction, interaction_from_spec
from .units import CONSTANTS, LEGEND_RATE, radius_from_mass

__all__ = [
    "__version__",
    "CONSTANTS",
    "LEGEND_RATE",
    "ConfigError",
    "CovarianceState",
    "ExperimentConfig",
    "MomentSet",
    "NonPhysicalCovariance",
    "characteristic_frequencies",
    "covariance_lab",
    "expand",
    "gaussian_entropy",
    "gravity_interaction",
    "interaction_from_spec",
    "log_negativity",
    "radius_from_mass",
    "reduced_moments_quadratic",
    "symplectic_spectrum",
]
