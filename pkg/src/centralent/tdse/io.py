"""Binary snapshots and moment tables.

Snapshot record, all little-endian, SI units:

====== ======== ==================================================
offset type     content
====== ======== ==================================================
0      float64  time (s)
8      float64  origin, position of node 0 (m)
16     float64  spacing (m)
24     uint64   number of nodes n
32     float64  2n values: re, im of the envelope at each node (m^-1/2)
32+16n float64  carrier wavenumber k (m^-1)
40+16n float64  carrier phase (rad)
====== ======== ==================================================

The wave function is ``exp(i (k r - phase)) * envelope``. Storing the
envelope rather than the product keeps a fast momentum carrier, which the
grid spacing does not have to resolve, out of the sampled values; lab-frame
runs have ``k = phase = 0`` and the envelope is the wave function itself.
Records can be concatenated; :func:`read_snapshot` reads one at the
current file position.
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from ..units import C_PM_PER_S, KEV_IN_J
from .grid import WaveGrid
from .moments import relative_moments, skewness

__all__ = ["write_snapshot", "read_snapshot", "write_moments_csv", "MOMENT_COLUMNS"]

_HEADER = struct.Struct("<dddQ")
_TRAILER = struct.Struct("<dd")
_PM = 1e-12
_MOM_SI = KEV_IN_J / (C_PM_PER_S * _PM)


def write_snapshot(fh: BinaryIO, state: WaveGrid) -> None:
    psi = state.amplitudes / np.sqrt(_PM)
    fh.write(_HEADER.pack(state.time, state.origin * _PM, state.spacing * _PM, psi.shape[0]))
    fh.write(np.ascontiguousarray(psi, dtype="<c16").tobytes())
    fh.write(_TRAILER.pack(state.wavenumber / _PM, state.phase))


def read_snapshot(fh: BinaryIO) -> WaveGrid:
    """Read one record back into internal units."""
    head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise EOFError("no snapshot record at this position")
    t, origin, spacing, n = _HEADER.unpack(head)
    data = fh.read(16 * n)
    tail = fh.read(_TRAILER.size)
    if len(data) < 16 * n or len(tail) < _TRAILER.size:
        raise EOFError("truncated snapshot record")
    k, phase = _TRAILER.unpack(tail)
    psi = np.frombuffer(data, dtype="<c16").astype(np.complex128) * np.sqrt(_PM)
    return WaveGrid(psi, spacing / _PM, origin / _PM, t, k * _PM, phase)


MOMENT_COLUMNS = (
    ("t", "s"),
    ("mean_r", "m"),
    ("var_r", "m^2"),
    ("mean_p", "kg m s^-1"),
    ("var_p", "kg^2 m^2 s^-2"),
    ("cov_rp", "J s"),
    ("skewness", "1"),
    ("norm", "1"),
    ("grid_points", "1"),
)


def moment_row(state: WaveGrid) -> list:
    m = relative_moments(state)
    return [
        state.time,
        m.mean_x * _PM,
        m.var_x * _PM**2,
        m.mean_p * _MOM_SI,
        m.var_p * _MOM_SI**2,
        m.cov_xp * _MOM_SI * _PM,
        skewness(state),
        state.norm(),
        state.size,
    ]


def write_moments_csv(path: str | Path, states: Iterable[WaveGrid]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{n} [{u}]" for n, u in MOMENT_COLUMNS])
        for st in states:
            w.writerow([repr(float(v)) if not isinstance(v, int) else v for v in moment_row(st)])
    return path

