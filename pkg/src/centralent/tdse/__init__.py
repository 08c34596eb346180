"""Relative-coordinate wave-packet propagation."""
from ._backend import BACKEND
from .grid import GridError, ResourceError, WaveGrid, extend_grid_if_needed
from .io import read_snapshot, write_moments_csv, write_snapshot
from .moments import discrete_energy, relative_moments, skewness
from .solver import (
    Propagator,
    SolverError,
    SolverSettings,
    initialize_relative_state,
    pentadiagonal_system,
    propagate,
    sample_schedule,
    step,
)

__all__ = [
    "BACKEND",
    "GridError",
    "ResourceError",
    "WaveGrid",
    "extend_grid_if_needed",
    "read_snapshot",
    "write_snapshot",
    "write_moments_csv",
    "discrete_energy",
    "relative_moments",
    "skewness",
    "Propagator",
    "SolverError",
    "SolverSettings",
    "initialize_relative_state",
    "pentadiagonal_system",
    "propagate",
    "sample_schedule",
    "step",
]
