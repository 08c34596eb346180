"""Two-body wave function on an (x_A, x_B) lattice and what can be read off it.

Coordinates on the lattice are displacements from the initial centres,
``u_A = x_A + L/2`` and ``u_B = x_B - L/2``, so that ``r = u_B - u_A`` and
``R = (u_A + u_B)/2``. The two-body state is the product of the free
centre-of-mass packet and the propagated relative packet.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.interpolate import CubicSpline

from .config import ExperimentConfig
from .gaussian import CovarianceState, assemble_covariance, drifting_com_moments
from .measures import log_negativity
from .tdse.grid import WaveGrid
from .tdse.moments import derivative, relative_moments
from .tdse.moments import skewness as _skewness
from .units import C_PM_PER_S, HBAR_C

__all__ = [
    "CoverageError",
    "SchmidtError",
    "FreeComState",
    "BipartiteGrid",
    "SchmidtSpectrum",
    "assemble_bipartite",
    "schmidt_entropy",
    "numeric_covariance",
    "hybrid_covariance",
    "skewness",
    "SnapshotAnalysis",
    "analyse_snapshot",
    "write_analysis_csv",
]


class CoverageError(ValueError):
    """The lattice misses a non-negligible part of the two-body state."""


class SchmidtError(RuntimeError):
    """The Schmidt spectrum could not reach the requested capture."""


@dataclass(frozen=True)
class FreeComState:
    """Closed-form centre-of-mass packet of total mass 2m, width sigma/sqrt(2) at t = 0."""

    sigma: float
    omega0: float
    mass: float
    total_momentum: float = 0.0

    @classmethod
    def from_config(cls, cfg: ExperimentConfig, total_momentum: float = 0.0) -> "FreeComState":
        return cls(cfg.sigma, cfg.omega0, cfg.mass, total_momentum)

    def mean(self, t: float) -> float:
        return self.total_momentum * C_PM_PER_S / (2.0 * self.mass) * t

    def variance(self, t: float) -> float:
        return 0.5 * self.sigma**2 * (1.0 + (self.omega0 * t) ** 2)

    def envelope(self, R, t: float):
        """Amplitude without the ``exp(i P R / hbar)`` carrier, up to a global phase."""
        z = self.sigma * (1.0 + 1j * self.omega0 * t)
        d = np.asarray(R, dtype=float) - self.mean(t)
        return (z * np.sqrt(np.pi)) ** -0.5 * np.exp(-(d**2) / (2.0 * self.sigma * z))

    @property
    def wavenumber(self) -> float:
        return self.total_momentum / HBAR_C


@dataclass(frozen=True)
class BipartiteGrid:
    """Two-body amplitudes on ``u_A = origin_A + i*spacing_A``, ``u_B = origin_B + j*spacing_B``.

    ``envelope`` is smooth; the full amplitude is
    ``envelope * exp(i (wavenumber_A u_A + wavenumber_B u_B))`` up to a
    global phase. Local phases never change the Schmidt spectrum, so only
    moment calculations need the carriers. ``separation`` (L) only enters
    the absolute first moments reported by :func:`numeric_covariance`.
    """

    envelope: np.ndarray
    spacing_A: float
    spacing_B: float
    origin_A: float
    origin_B: float
    time: float
    wavenumber_A: float = 0.0
    wavenumber_B: float = 0.0
    separation: float = 0.0

    @property
    def positions_A(self) -> np.ndarray:
        return self.origin_A + self.spacing_A * np.arange(self.envelope.shape[0])

    @property
    def positions_B(self) -> np.ndarray:
        return self.origin_B + self.spacing_B * np.arange(self.envelope.shape[1])

    @property
    def amplitudes(self) -> np.ndarray:
        ca = np.exp(1j * self.wavenumber_A * self.positions_A)
        cb = np.exp(1j * self.wavenumber_B * self.positions_B)
        return self.envelope * np.outer(ca, cb)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.envelope) ** 2) * self.spacing_A * self.spacing_B)

    def swapped(self) -> "BipartiteGrid":
        return BipartiteGrid(self.envelope.T.copy(), self.spacing_B, self.spacing_A,
                             self.origin_B, self.origin_A, self.time,
                             self.wavenumber_B, self.wavenumber_A, self.separation)


def _window(center: float, sd: float, spacing: float, nsd: float) -> tuple[float, int]:
    n = int(np.ceil(2 * nsd * sd / spacing)) + 1
    return center - 0.5 * (n - 1) * spacing, n


def assemble_bipartite(
    com: FreeComState,
    psi: WaveGrid,
    nsd: float = 8.0,
    lattice_spacing: float | None = None,
    method: str = "aligned",
    norm_tol: float = 1e-7,
    separation: float = 0.0,
) -> BipartiteGrid:
    """Build the two-body amplitudes from the centre-of-mass and relative packets.

    The lattice covers ``nsd`` standard deviations of each one-body marginal.
    With ``method="aligned"`` the lattice spacing is rounded to a multiple of
    the relative grid spacing and the B origin is shifted by less than one
    relative-grid step, so every ``u_B - u_A`` lands on a node of ``psi`` and
    no interpolation is needed. ``method="cubic"`` keeps the requested
    spacing and interpolates the relative envelope with a cubic spline.
    """
    t = psi.time
    rel = relative_moments(psi)
    var_R = com.variance(t)
    mean_R = com.mean(t)
    sd = np.sqrt(var_R + 0.25 * rel.var_x)
    if lattice_spacing is None:
        lattice_spacing = sd / 5.0
    h = psi.spacing
    if method == "aligned":
        q = max(1, int(round(lattice_spacing / h)))
        H = q * h
    elif method == "cubic":
        q = None
        H = float(lattice_spacing)
    else:
        raise ValueError(f"unknown assembly method {method!r}")
    a0, nA = _window(mean_R - 0.5 * rel.mean_x, sd, H, nsd)
    b0, nB = _window(mean_R + 0.5 * rel.mean_x, sd, H, nsd)
    uA = a0 + H * np.arange(nA)
    if q is not None:
        # shift b0 so that b0 - a0 - psi.origin is a whole number of steps
        offset = int(round((b0 - a0 - psi.origin) / h))
        b0 = a0 + psi.origin + offset * h
        uB = b0 + H * np.arange(nB)
        idx = offset + q * (np.arange(nB)[None, :] - np.arange(nA)[:, None])
        inside = (idx >= 0) & (idx < psi.size)
        chi = np.zeros((nA, nB), dtype=np.complex128)
        chi[inside] = psi.amplitudes[idx[inside]]
    else:
        uB = b0 + H * np.arange(nB)
        r = uB[None, :] - uA[:, None]
        x = psi.positions
        re = CubicSpline(x, psi.amplitudes.real, extrapolate=False)
        im = CubicSpline(x, psi.amplitudes.imag, extrapolate=False)
        chi = np.nan_to_num(re(r)) + 1j * np.nan_to_num(im(r))
    R = 0.5 * (uA[:, None] + uB[None, :])
    env = com.envelope(R, t) * chi
    k = psi.wavenumber
    bg = BipartiteGrid(env, H, H, a0, float(b0), t,
                       0.5 * com.wavenumber - k, 0.5 * com.wavenumber + k, float(separation))
    n = bg.norm()
    if abs(1.0 - n) > norm_tol:
        raise CoverageError(
            f"two-body norm {n:.10f} differs from 1 by more than {norm_tol:g}; "
            "widen the window or the relative grid"
        )
    return bg


@dataclass(frozen=True)
class SchmidtSpectrum:
    lambdas: np.ndarray
    captured_norm: float
    rank_used: int
    total_norm: float


def schmidt_entropy(
    bg: BipartiteGrid,
    capture: float = 1e-7,
    tail_relative: float = 1e-6,
    tail_floor: float = 1e-14,
    max_rank: int | None = None,
) -> tuple[float, SchmidtSpectrum]:
    """Entanglement entropy (bits) from the singular values of the weighted amplitude matrix.

    Schmidt weights are ``lambda_j = s_j^2`` for the singular values of
    ``envelope * sqrt(h_A h_B)``. The rank grows until the kept weights sum
    to within ``capture`` of one and the entropy the discarded weights would
    add is below ``tail_relative`` times the entropy kept so far (or below
    ``tail_floor`` bits, for product states). Both tests matter. Weakly
    entangled states have a second weight far below ``capture``, and a
    state with S ~ 1e-10 needs a relative tail test, not an absolute one.
    """
    m = bg.envelope * np.sqrt(bg.spacing_A * bg.spacing_B)
    s = np.linalg.svd(m, compute_uv=False)
    lam = s * s
    total = float(lam.sum())
    limit = len(lam) if max_rank is None else min(max_rank, len(lam))
    p = lam / total
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    cum = np.cumsum(lam)
    kept_S = np.cumsum(contrib)
    tail = contrib[::-1].cumsum()[::-1]  # tail[j] = entropy of weights j..end
    rank = None
    for r in range(1, limit + 1):
        rest = tail[r] if r < len(lam) else 0.0
        if 1.0 - cum[r - 1] <= capture and rest <= max(tail_relative * kept_S[r - 1], tail_floor):
            rank = r
            break
    if rank is None:
        raise SchmidtError(
            f"rank {limit} captures {cum[limit - 1]:.10f} of the norm; need 1 - sum <= {capture:g}"
        )
    return max(0.0, float(kept_S[rank - 1])), SchmidtSpectrum(lam[:rank].copy(), float(cum[rank - 1]), rank, total)


def numeric_covariance(bg: BipartiteGrid) -> CovarianceState:
    """Lab covariance of the two-body state by quadrature on the lattice.

    Positions are summed directly; momenta use eighth-order differences of
    the envelope after removing its mean carrier along each axis. First
    moments are absolute lab positions (``u_A - L/2``, ``u_B + L/2``).
    """
    hA, hB = bg.spacing_A, bg.spacing_B
    xa, xb = bg.positions_A, bg.positions_B
    E = bg.envelope
    w = np.abs(E) ** 2
    norm = w.sum()
    w = w / norm
    mA = float(w.sum(axis=1) @ xa)
    mB = float(w.sum(axis=0) @ xb)
    dA = xa - mA
    dB = xb - mB

    def d_A(f):
        return np.apply_along_axis(derivative, 0, f, hA)

    def d_B(f):
        return np.apply_along_axis(derivative, 1, f, hB)

    # residual carriers of the envelope
    kA = float(np.sum(np.imag(np.conj(E) * d_A(E))) / norm)
    kB = float(np.sum(np.imag(np.conj(E) * d_B(E))) / norm)
    F = E * np.exp(-1j * (kA * dA[:, None] + kB * dB[None, :]))
    fa, fb = d_A(F), d_B(F)
    rA = float(np.sum(np.imag(np.conj(F) * fa)) / norm)
    rB = float(np.sum(np.imag(np.conj(F) * fb)) / norm)
    flux_A = np.imag(np.conj(F) * fa) / norm
    flux_B = np.imag(np.conj(F) * fb) / norm
    hb = HBAR_C
    var_xa = float(w.sum(axis=1) @ dA**2)
    var_xb = float(w.sum(axis=0) @ dB**2)
    cov_xx = float(dA @ w @ dB)
    var_pa = hb**2 * (float(np.sum(np.abs(fa) ** 2) / norm) - rA**2)
    var_pb = hb**2 * (float(np.sum(np.abs(fb) ** 2) / norm) - rB**2)
    cov_pp = hb**2 * (float(np.sum(np.real(np.conj(fa) * fb)) / norm) - rA * rB)
    c_aa = hb * float(np.sum(dA[:, None] * flux_A))
    c_bb = hb * float(np.sum(dB[None, :] * flux_B))
    c_ab = hb * float(np.sum(dA[:, None] * flux_B))
    c_ba = hb * float(np.sum(dB[None, :] * flux_A))
    el = np.array(
        [
            [var_xa, c_aa, cov_xx, c_ab],
            [c_aa, var_pa, c_ba, cov_pp],
            [cov_xx, c_ba, var_xb, c_bb],
            [c_ab, cov_pp, c_bb, var_pb],
        ]
    )
    pA = hb * (bg.wavenumber_A + kA + rA)
    pB = hb * (bg.wavenumber_B + kB + rB)
    L = bg.separation
    return CovarianceState(el, np.array([mA - 0.5 * L, pA, mB + 0.5 * L, pB]), bg.time)


def hybrid_covariance(cfg: ExperimentConfig, psi: WaveGrid, total_momentum: float = 0.0) -> CovarianceState:
    """Lab covariance from analytic centre-of-mass moments and the numerical relative packet.

    The two factors are independent, so this is exact up to the accuracy of
    the relative moments, and far more precise than quadrature on a coarse
    two-body lattice.
    """
    com = drifting_com_moments(cfg, total_momentum, psi.time)
    return assemble_covariance(com, relative_moments(psi), cfg.separation, psi.time)


def skewness(psi: WaveGrid) -> float:
    """Standardised third central moment of the relative position distribution."""
    return _skewness(psi)


@dataclass(frozen=True)
class SnapshotAnalysis:
    time: float
    E_gaussian_extracted: float
    S_schmidt: float
    skewness: float
    spectrum: SchmidtSpectrum


def analyse_snapshot(cfg: ExperimentConfig, psi: WaveGrid, **assembly) -> SnapshotAnalysis:
    """Log-negativity of the Gaussian part, Schmidt entropy and skewness of one snapshot.

    For a non-Gaussian state the log-negativity is that of the Gaussian
    state with the same covariance, not the exact negativity.
    """
    assembly.setdefault("separation", cfg.separation)
    bg = assemble_bipartite(FreeComState.from_config(cfg), psi, **assembly)
    S, spec = schmidt_entropy(bg)
    E = log_negativity(hybrid_covariance(cfg, psi))
    return SnapshotAnalysis(psi.time, E, S, skewness(psi), spec)


def write_analysis_csv(path: str | Path, rows: Iterable[SnapshotAnalysis], n_lambda: int = 4) -> Path:
    """Per-snapshot table: t, E, S, skewness and the leading Schmidt weights."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t [s]", "E_gaussian_extracted [1]", "S_schmidt [bit]", "skewness [1]",
                    "schmidt_rank [1]", "capture_deficit [1]"]
                   + [f"lambda_{j + 1} [1]" for j in range(n_lambda)])
        for a in rows:
            lam = list(a.spectrum.lambdas[:n_lambda]) + [0.0] * max(0, n_lambda - len(a.spectrum.lambdas))
            w.writerow([repr(float(a.time)), repr(float(a.E_gaussian_extracted)), repr(float(a.S_schmidt)),
                        repr(float(a.skewness)), a.spectrum.rank_used,
                        repr(float(1.0 - a.spectrum.captured_norm))]
                       + [repr(float(x)) for x in lam])
    return path

