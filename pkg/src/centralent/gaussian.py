"""Closed-form moment dynamics for the free centre of mass and the harmonic
relative coordinate, and their assembly into the lab-frame covariance matrix.

Lab ordering is ``(x_A, p_A, x_B, p_B)`` with

    R = (x_A + x_B)/2,  r = x_B - x_A - L,  P = p_A + p_B,  p = (p_B - p_A)/2.

Positions are in pm, momenta in keV (``p c``) and position-momentum products
in keV pm, so ``hbar`` is :data:`~centralent.units.HBAR_C` throughout.
All functions broadcast over array-valued ``t``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .config import ExperimentConfig
from .units import C_PM_PER_S, HBAR_C, KEV_IN_J

__all__ = [
    "MomentSet",
    "CovarianceState",
    "com_moments",
    "drifting_com_moments",
    "reduced_moments_quadratic",
    "covariance_lab",
    "assemble_covariance",
    "covariance_table",
    "write_covariance_csv",
]


@dataclass(frozen=True)
class MomentSet:
    """First and centred second moments of one canonical pair.

    ``cov_xp`` is the symmetrised covariance ``<{x,p}>/2 - <x><p>``.
    """

    mean_x: np.ndarray | float
    mean_p: np.ndarray | float
    var_x: np.ndarray | float
    var_p: np.ndarray | float
    cov_xp: np.ndarray | float

    @property
    def raw_x2(self):
        return self.var_x + self.mean_x**2

    @property
    def raw_p2(self):
        """``<p^2>`` including the drift contribution ``<p>^2``."""
        return self.var_p + self.mean_p**2

    @property
    def raw_xp(self):
        return self.cov_xp + self.mean_x * self.mean_p

    def uncertainty_product(self):
        """``var_x var_p - cov_xp^2``; equals ``(hbar/2)^2`` for a pure Gaussian."""
        return self.var_x * self.var_p - self.cov_xp**2


@dataclass(frozen=True)
class CovarianceState:
    """Lab-frame second moments of the two-mode state at one instant."""

    elements: np.ndarray
    first_moments: np.ndarray = field(default_factory=lambda: np.zeros(4))
    time: float = 0.0

    def __post_init__(self):
        el = np.asarray(self.elements, dtype=float)
        if el.shape != (4, 4):
            raise ValueError(f"covariance must be 4x4, got shape {el.shape}")
        object.__setattr__(self, "elements", el)
        object.__setattr__(self, "first_moments", np.asarray(self.first_moments, dtype=float))

    @property
    def alpha(self) -> np.ndarray:
        return self.elements[:2, :2]

    @property
    def beta(self) -> np.ndarray:
        return self.elements[2:, 2:]

    @property
    def gamma(self) -> np.ndarray:
        return self.elements[:2, 2:]

    def asymmetry(self) -> float:
        """Largest relative deviation from the A<->B exchange symmetry."""
        s = self.elements
        pairs = [((2, 2), (0, 0)), ((3, 3), (1, 1)), ((2, 3), (0, 1)), ((1, 2), (0, 3))]
        scale = np.abs(s).max() or 1.0
        dev = max(abs(s[a] - s[b]) for a, b in pairs)
        dev = max(dev, np.abs(s - s.T).max())
        return float(dev / scale)

    def min_uncertainty_eigenvalue(self, hbar: float = HBAR_C) -> float:
        """Smallest eigenvalue of ``sigma + i (hbar/2) Omega`` in units of hbar.

        Non-negative (up to rounding) for any physical state. Positions are
        rescaled by their spread and momenta by ``spread/hbar`` first; that
        scaling is symplectic, so the test is unchanged but well conditioned.
        """
        a = np.sqrt(self.elements[0, 0])
        b = np.sqrt(self.elements[2, 2])
        d = np.array([1 / a, a / hbar, 1 / b, b / hbar])
        omega = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
        m = self.elements * np.outer(d, d) + 0.5j * omega
        return float(np.linalg.eigvalsh(m).min())


# ---------------------------------------------------------------------------
# numerically stable hyperbolic pieces

def _sinhc(x):
    """sinh(x)/x with the removable point at 0."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x != 0
    out[nz] = np.sinh(x[nz]) / x[nz]
    return out


def _sinhc_sq_minus_one(x):
    """(sinh(x)^2 - x^2) / x^2, accurate for small x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.5
    xs = x[small]
    # sinh^2 x = sum_{k>=1} 2^{2k-1} x^{2k} / (2k)!
    acc = np.zeros_like(xs)
    x2 = xs * xs
    power = np.ones_like(xs)
    for k in range(2, 14):
        coeff = 2.0 ** (2 * k - 1) / _factorial(2 * k)
        acc += coeff * power * x2
        power = power * x2
    out[small] = acc
    xl = x[~small]
    out[~small] = (np.sinh(xl) ** 2 - xl**2) / xl**2
    return out


def _factorial(n: int) -> float:
    return float(np.prod(np.arange(1, n + 1, dtype=float)))


def _one_minus_sinhc(y):
    """1 - sinh(y)/y, accurate for small y (negative for y != 0)."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = np.abs(y) < 0.5
    ys = y[small] ** 2
    acc = np.zeros_like(ys)
    power = ys.copy()
    for k in range(1, 12):
        acc -= power / _factorial(2 * k + 1)
        power = power * ys
    out[small] = acc
    yl = y[~small]
    out[~small] = 1.0 - np.sinh(yl) / yl
    return out


def _squeeze(*arrs):
    res = tuple(a[()] if isinstance(a, np.ndarray) and a.ndim == 0 else a for a in arrs)
    return res


# ---------------------------------------------------------------------------
# subsystem moments

def com_moments(cfg: ExperimentConfig, t) -> MomentSet:
    """Free spreading of the centre-of-mass packet (mass 2m, initial width sigma/sqrt 2)."""
    return drifting_com_moments(cfg, 0.0, t)


def drifting_com_moments(cfg: ExperimentConfig, total_momentum: float, t) -> MomentSet:
    """Centre-of-mass moments when the pair carries net momentum ``total_momentum`` (keV).

    Only the mean position moves; the centred moments are those of the
    packet at rest.
    """
    t = np.asarray(t, dtype=float)
    w0t = cfg.omega0 * t
    var_x = 0.5 * cfg.sigma**2 * (1.0 + w0t**2)
    var_p = np.full_like(t, HBAR_C**2 / (2.0 * cfg.sigma**2))
    cov = 0.5 * HBAR_C * w0t
    mean_x = cfg.velocity(total_momentum, 2.0 * cfg.mass) * t
    mean_p = np.full_like(t, float(total_momentum))
    return MomentSet(*_squeeze(mean_x, mean_p, var_x, var_p, cov))


def reduced_moments_quadratic(cfg: ExperimentConfig, t, omega: float | None = None) -> MomentSet:
    """Exact moments of the relative coordinate under the quadratic potential.

    ``omega`` overrides the gravitational frequency of ``cfg`` (any value
    >= 0, including 0 for free relative motion); ``cfg.order`` is ignored.
    """
    t = np.asarray(t, dtype=float)
    w = cfg.omega if omega is None else float(omega)
    w0 = cfg.omega0
    x = w * t
    ch, sh = np.cosh(x), np.sinh(x)
    sc = _sinhc(x)
    # (omega0/omega) sinh(wt) written without dividing by omega
    w0_sh_over_w = w0 * t * sc
    var_r = 2.0 * cfg.sigma**2 * (ch**2 + w0_sh_over_w**2)
    var_p = HBAR_C**2 / (8.0 * cfg.sigma**2) * (ch**2 + (w * sh / w0) ** 2)
    cov = 0.25 * HBAR_C * (2.0 * w0 * t * _sinhc(2 * x) + (w / w0) * np.sinh(2 * x))
    v0 = cfg.velocity(cfg.p0)
    mean_r = -cfg.separation * np.sinh(0.5 * x) ** 2 - 2.0 * v0 * t * sc
    # m omega L / 4 in keV: mass in keV times a velocity over c
    mean_p = -cfg.p0 * ch - 0.25 * cfg.mass * w * w * t * sc * cfg.separation / C_PM_PER_S
    return MomentSet(*_squeeze(mean_r, mean_p, var_r, var_p, cov))


# ---------------------------------------------------------------------------
# lab assembly

def _lab_elements(cfg: ExperimentConfig, t, omega: float | None = None) -> dict:
    """The six independent lab elements, vectorised over t, stable for small omega*t."""
    t = np.asarray(t, dtype=float)
    w = cfg.omega if omega is None else float(omega)
    w0 = cfg.omega0
    s2 = cfg.sigma**2
    x = w * t
    sh = np.sinh(x)
    com = com_moments(cfg, t)
    rel = reduced_moments_quadratic(cfg, t, omega=w)
    hb = HBAR_C
    s00 = com.var_x + 0.25 * rel.var_x
    s11 = 0.25 * com.var_p + rel.var_p
    # Delta R^2 - Delta r^2 / 4 = -(sigma^2/2) [sinh^2 + (omega0 t)^2 (sinhc^2 - 1)]
    s02 = -0.5 * s2 * (sh**2 + (w0 * t) ** 2 * _sinhc_sq_minus_one(x))
    s13 = -hb**2 / (8.0 * s2) * sh**2 * (1.0 + (w / w0) ** 2)
    s01 = 0.5 * com.cov_xp + 0.5 * rel.cov_xp
    # Cov(R,P)/2 - Cov(r,p)/2, with the leading omega0 t pieces cancelled analytically
    s03 = 0.25 * hb * w0 * t * _one_minus_sinhc(2 * x) - 0.125 * hb * (w / w0) * np.sinh(2 * x)
    return {
        "sigma00": s00,
        "sigma02": s02,
        "sigma11": s11,
        "sigma13": s13,
        "sigma01": s01,
        "sigma03": s03,
        "mean_r": rel.mean_x,
        "mean_p": rel.mean_p,
    }


def _matrix(s00, s02, s11, s13, s01, s03) -> np.ndarray:
    return np.array(
        [
            [s00, s01, s02, s03],
            [s01, s11, s03, s13],
            [s02, s03, s00, s01],
            [s03, s13, s01, s11],
        ],
        dtype=float,
    )


def _lab_means(separation: float, com: MomentSet, mean_r, mean_p) -> np.ndarray:
    return np.array(
        [
            com.mean_x - 0.5 * separation - 0.5 * mean_r,
            0.5 * com.mean_p - mean_p,
            com.mean_x + 0.5 * separation + 0.5 * mean_r,
            0.5 * com.mean_p + mean_p,
        ],
        dtype=float,
    )


def covariance_lab(cfg: ExperimentConfig, t: float, omega: float | None = None) -> CovarianceState:
    """Analytic lab covariance at a single time ``t`` (s).

    The matrix does not depend on ``cfg.p0``; the first moments do.
    """
    e = {k: float(v) for k, v in _lab_elements(cfg, float(t), omega).items()}
    el = _matrix(e["sigma00"], e["sigma02"], e["sigma11"], e["sigma13"], e["sigma01"], e["sigma03"])
    com = com_moments(cfg, float(t))
    means = _lab_means(cfg.separation, com, e["mean_r"], e["mean_p"])
    return CovarianceState(el, means, float(t))


def assemble_covariance(
    com: MomentSet, rel: MomentSet, separation: float = 0.0, time: float = 0.0
) -> CovarianceState:
    """Combine centre-of-mass and relative moments into the lab covariance.

    Used for the hybrid route where ``rel`` comes from a numerically
    propagated wave function. Cross-correlations between R and r vanish
    because the two factors are independent.
    """
    s00 = com.var_x + 0.25 * rel.var_x
    s02 = com.var_x - 0.25 * rel.var_x
    s11 = 0.25 * com.var_p + rel.var_p
    s13 = 0.25 * com.var_p - rel.var_p
    s01 = 0.5 * (com.cov_xp + rel.cov_xp)
    s03 = 0.5 * (com.cov_xp - rel.cov_xp)
    el = _matrix(*(float(v) for v in (s00, s02, s11, s13, s01, s03)))
    return CovarianceState(el, _lab_means(separation, com, rel.mean_x, rel.mean_p), float(time))


# ---------------------------------------------------------------------------
# tabular output

_SI_POS2 = 1e-24
_SI_MOM = KEV_IN_J / (C_PM_PER_S * 1e-12)
_SI_ACTION = _SI_MOM * 1e-12

CSV_COLUMNS = (
    ("t", "s"),
    ("sigma00", "m^2"),
    ("sigma02", "m^2"),
    ("sigma11", "kg^2 m^2 s^-2"),
    ("sigma13", "kg^2 m^2 s^-2"),
    ("sigma01", "J s"),
    ("sigma03", "J s"),
    ("mean_r", "m"),
    ("mean_p", "kg m s^-1"),
)


def covariance_table(cfg: ExperimentConfig, times: Iterable[float]) -> dict:
    """Analytic covariance elements in SI, keyed by column name."""
    t = np.asarray(list(times), dtype=float)
    e = _lab_elements(cfg, t)
    scale = {
        "sigma00": _SI_POS2,
        "sigma02": _SI_POS2,
        "sigma11": _SI_MOM**2,
        "sigma13": _SI_MOM**2,
        "sigma01": _SI_ACTION,
        "sigma03": _SI_ACTION,
        "mean_r": 1e-12,
        "mean_p": _SI_MOM,
    }
    out = {"t": t}
    for k, s in scale.items():
        out[k] = np.broadcast_to(np.asarray(e[k]) * s, t.shape)
    return out


def write_covariance_csv(path: str | Path, cfg: ExperimentConfig, times: Iterable[float]) -> Path:
    """Write the analytic covariance time series; the header row carries units."""
    path = Path(path)
    tab = covariance_table(cfg, times)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{name} [{unit}]" for name, unit in CSV_COLUMNS])
        for i in range(len(tab["t"])):
            w.writerow([repr(float(tab[name][i])) for name, _ in CSV_COLUMNS])
    return path
