"""Uniform 1-D grids carrying the relative-coordinate wave function."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = ["WaveGrid", "GridError", "ResourceError", "extend_grid_if_needed", "GUARD_POINTS",
           "EXTENSION_THRESHOLD", "PAD_FRACTION", "MAX_POINTS"]

#: points at each edge watched for leaking probability
GUARD_POINTS = 16
#: probability inside a guard band that triggers growth on that side
EXTENSION_THRESHOLD = 1e-20
#: size of each zero block appended, as a fraction of the current length
PAD_FRACTION = 0.10
#: default cap on grid length (about 32 MB of complex amplitudes)
MAX_POINTS = 2_000_000


class GridError(ValueError):
    """The grid cannot represent the requested state."""


class ResourceError(MemoryError):
    """Growing the grid would exceed the configured memory budget."""


@dataclass(frozen=True)
class WaveGrid:
    """Wave function sampled at ``origin + i * spacing`` (pm) at ``time`` (s).

    ``amplitudes`` is the slowly varying envelope; the physical wave function
    is ``exp(i (wavenumber * r - phase)) * amplitudes`` (see
    :meth:`lab_amplitudes`). A propagator working in the lab frame keeps
    ``wavenumber = phase = 0``.
    """

    amplitudes: np.ndarray
    spacing: float
    origin: float
    time: float = 0.0
    wavenumber: float = 0.0
    phase: float = 0.0

    @property
    def size(self) -> int:
        return int(self.amplitudes.shape[0])

    @property
    def positions(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.size)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.spacing)

    def lab_amplitudes(self) -> np.ndarray:
        if self.wavenumber == 0.0 and self.phase == 0.0:
            return self.amplitudes.copy()
        return np.exp(1j * (self.wavenumber * self.positions - self.phase)) * self.amplitudes

    def with_(self, **kw) -> "WaveGrid":
        return replace(self, **kw)


def extend_grid_if_needed(
    state: WaveGrid,
    guard: int = GUARD_POINTS,
    threshold: float = EXTENSION_THRESHOLD,
    pad_fraction: float = PAD_FRACTION,
    max_points: int = MAX_POINTS,
) -> WaveGrid:
    """Pad the grid with zeros on each side whose guard band holds too much probability.

    Existing amplitudes are copied unchanged, so the norm is preserved
    exactly. Returns ``state`` itself when nothing needs to grow.
    """
    psi = state.amplitudes
    h = state.spacing
    left = float(np.sum(np.abs(psi[:guard]) ** 2) * h) > threshold
    right = float(np.sum(np.abs(psi[-guard:]) ** 2) * h) > threshold
    if not (left or right):
        return state
    pad = max(guard, int(np.ceil(pad_fraction * psi.shape[0])))
    new_size = psi.shape[0] + pad * (int(left) + int(right))
    if new_size > max_points:
        raise ResourceError(
            f"grid would grow to {new_size} points, above the limit of {max_points}"
        )
    grown = np.zeros(new_size, dtype=np.complex128)
    start = pad if left else 0
    grown[start : start + psi.shape[0]] = psi
    return replace(state, amplitudes=grown, origin=state.origin - start * h)
