"""How higher-order terms of the potential amplify entanglement when the
masses carry momentum, and a moment-based witness for those terms.

Each order n >= 3 of the expanded potential changes the average force
gradient by a factor ``1 + eps_n(t)``. The entropy scales with the full
factor; the log-negativity, at cubic order, with ``1 + eps_3/2``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import comb, sqrt
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ExperimentConfig
from .gaussian import reduced_moments_quadratic
from .potentials import CentralInteraction

__all__ = [
    "half_integer_gamma",
    "epsilon3",
    "epsilon3_strong",
    "epsilon_n",
    "predict_entropy_amplification",
    "predict_negativity_amplification",
    "WitnessSeries",
    "momentum_witness",
    "CorrectionSeries",
    "correction_series",
]


def half_integer_gamma(k: int) -> float:
    """Gamma(k + 1/2) for integer k >= 0, by the recurrence from sqrt(pi)."""
    if k < 0:
        raise ValueError("only non-negative k")
    g = sqrt(np.pi)
    for j in range(k):
        g *= j + 0.5
    return g


def epsilon3(interaction: CentralInteraction | None, cfg: ExperimentConfig, t):
    """Cubic correction ``k t`` along the free trajectory.

    With ``interaction=None`` this is the gravitational ``6 p0 t / (m L)``.
    """
    if interaction is None:
        return 6.0 * cfg.p0_rate * np.asarray(t, dtype=float)
    return interaction.epsilon3(t)


def epsilon3_strong(interaction: CentralInteraction, cfg: ExperimentConfig, t):
    """Cubic correction from the exact harmonic mean displacement instead of free drift.

    Useful when the interaction visibly bends the trajectory; it agrees with
    :func:`epsilon3` to first order in omega t.
    """
    mean_r = reduced_moments_quadratic(cfg, t, omega=np.sqrt(interaction.omega_sq)).mean_x
    return interaction.epsilon3_from_mean(mean_r)


def epsilon_n(cfg: ExperimentConfig, n: int, t):
    """Order-n correction for gravity-like ``1/d`` potentials.

    The relative packet is treated as a Gaussian of variance
    ``2 sigma^2 (1 + omega0^2 t^2)`` drifting freely to ``-2 p0 t / m``; the
    correction is ``(-1)^n n (n-1) <r^(n-2)> / (2 L^(n-2))`` with the
    moment expanded binomially (odd central moments vanish).
    """
    if int(n) != n or n < 3:
        raise ValueError(f"order must be an integer >= 3, got {n!r}")
    n = int(n)
    t = np.asarray(t, dtype=float)
    r_cl = -2.0 * cfg.velocity(cfg.p0) * t
    width = np.sqrt(2.0) * np.sqrt(2.0 * cfg.sigma**2 * (1.0 + (cfg.omega0 * t) ** 2))
    total = np.zeros_like(t)
    for m in range(0, n - 1, 2):
        total = total + comb(n - 2, m) * r_cl ** (n - m - 2) * width**m * half_integer_gamma(m // 2)
    out = (-1) ** n * n * (n - 1) / (2.0 * sqrt(np.pi) * cfg.separation ** (n - 2)) * total
    return out[()] if out.ndim == 0 else out


def predict_entropy_amplification(cfg: ExperimentConfig, N: int, t, S0,
                                  interaction: CentralInteraction | None = None):
    """``(1 + sum_{n=3..N} eps_n(t)) * S0``; an interaction overrides the cubic rate."""
    t = np.asarray(t, dtype=float)
    factor = np.ones_like(t)
    for n in range(3, int(N) + 1):
        factor = factor + (epsilon3(interaction, cfg, t) if n == 3 and interaction is not None
                           else epsilon_n(cfg, n, t))
    out = factor * np.asarray(S0, dtype=float)
    return out[()] if np.ndim(out) == 0 else out


def predict_negativity_amplification(cfg: ExperimentConfig, t, E0, N: int = 3,
                                     interaction: CentralInteraction | None = None):
    """``(1 + eps_3(t)/2) * E0``, the cubic-order log-negativity.

    No closed form exists beyond cubic order, so ``N`` other than 3 is
    refused instead of extrapolated.
    """
    if N != 3:
        raise ValueError("the negativity amplification is only available at cubic order (N = 3)")
    out = (1.0 + 0.5 * epsilon3(interaction, cfg, t)) * np.asarray(E0, dtype=float)
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class WitnessSeries:
    """``d^2<p>/dt^2 / <p>`` on the interior samples; NaN marks undefined points."""

    times: np.ndarray
    ratio: np.ndarray

    def relative_variation(self) -> float:
        """(max - min) / |mean| over the defined points."""
        r = self.ratio[np.isfinite(self.ratio)]
        if r.size == 0:
            return float("nan")
        m = abs(float(np.mean(r)))
        return float((r.max() - r.min()) / m) if m > 0 else float(r.max() - r.min())


def momentum_witness(times: Sequence[float], mean_p: Sequence[float], floor: float = 1e-9) -> WitnessSeries:
    """Second time derivative of the mean relative momentum divided by itself.

    Uses the five-point stencil on a uniform time grid, so two samples are
    trimmed at each end. Windows in which ``<p>`` changes sign, or drops
    below ``floor`` times its largest magnitude, give NaN.
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(mean_p, dtype=float)
    if t.shape != p.shape or t.size < 5:
        raise ValueError("need at least five matching samples")
    dt = np.diff(t)
    if np.any(np.abs(dt - dt[0]) > 1e-9 * abs(dt[0])):
        raise ValueError("samples must be uniformly spaced in time")
    h = dt[0]
    # grouped so that a constant trace cancels exactly
    d2 = (16.0 * (p[1:-3] + p[3:-1]) - (p[:-4] + p[4:]) - 30.0 * p[2:-2]) / (12 * h * h)
    centre = p[2:-2]
    scale = np.abs(p).max()
    windows = np.lib.stride_tricks.sliding_window_view(p, 5)
    bad = (windows.min(axis=1) < 0) & (windows.max(axis=1) > 0)
    bad |= np.abs(centre) <= floor * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bad, np.nan, d2 / np.where(bad, 1.0, centre))
    return WitnessSeries(t[2:-2], ratio)


@dataclass(frozen=True)
class CorrectionSeries:
    times: np.ndarray
    epsilons: dict
    order: int
    assumptions: tuple = ("weak_field", "free_drift")
    extras: dict = field(default_factory=dict)

    @property
    def entropy_factor(self) -> np.ndarray:
        return 1.0 + sum(self.epsilons.values()) if self.epsilons else np.ones_like(self.times)

    @property
    def negativity_factor(self) -> np.ndarray:
        if 3 not in self.epsilons:
            return np.ones_like(self.times)
        return 1.0 + 0.5 * self.epsilons[3]

    def write_csv(self, path: str | Path, witness: WitnessSeries | None = None) -> Path:
        path = Path(path)
        ns = sorted(self.epsilons)
        wmap = {}
        if witness is not None:
            wmap = {round(float(t), 12): float(r) for t, r in zip(witness.times, witness.ratio)}
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t [s]"] + [f"eps{n} [1]" for n in ns]
                       + ["S_pred/S0 [1]", "E_pred/E0 [1]", "witness_ratio [s^-2]"])
            for i, t in enumerate(self.times):
                row = [repr(float(t))] + [repr(float(self.epsilons[n][i])) for n in ns]
                row += [repr(float(self.entropy_factor[i])), repr(float(self.negativity_factor[i]))]
                row.append(repr(wmap.get(round(float(t), 12), float("nan"))))
                w.writerow(row)
        return path


def correction_series(cfg: ExperimentConfig, times: Sequence[float],
                      interaction: CentralInteraction | None = None) -> CorrectionSeries:
    """All corrections up to ``cfg.order`` on a time grid."""
    t = np.asarray(times, dtype=float)
    eps = {}
    for n in range(3, int(cfg.order) + 1):
        eps[n] = np.asarray(epsilon3(interaction, cfg, t) if n == 3 and interaction is not None
                            else epsilon_n(cfg, n, t), dtype=float) * np.ones_like(t)
    return CorrectionSeries(t, eps, int(cfg.order))
