"""Entanglement of two-mode Gaussian states from their covariance matrix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .gaussian import CovarianceState, covariance_lab
from .units import HBAR_C

__all__ = [
    "NonPhysicalCovariance",
    "SymplecticSpectrum",
    "symplectic_spectrum",
    "log_negativity",
    "entropy_function",
    "gaussian_entropy",
    "approx_log_negativity",
    "ApproximationCheck",
    "compare_approximation",
]

_LN2 = np.log(2.0)


class NonPhysicalCovariance(ValueError):
    """The matrix violates the uncertainty principle beyond rounding tolerance."""


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Symplectic data of the partially transposed covariance.

    Everything is in units where hbar = 1 (``nu`` values are multiples of
    hbar, so separable states have ``nu_minus >= 1/2``).
    """

    nu_minus: float
    nu_plus: float
    sigma_tilde: float
    det_sigma: float


def _as_matrix(cov) -> np.ndarray:
    if isinstance(cov, CovarianceState):
        return cov.elements
    m = np.asarray(cov, dtype=float)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 covariance, got shape {m.shape}")
    return m


def _dimensionless(m: np.ndarray, hbar: float) -> np.ndarray:
    # local scaling x -> x/a, p -> p a/hbar is symplectic and removes hbar
    a, b = np.sqrt(m[0, 0]), np.sqrt(m[2, 2])
    if not (a > 0 and b > 0):
        raise NonPhysicalCovariance("position variances must be positive")
    d = np.array([1 / a, a / hbar, 1 / b, b / hbar])
    return m * np.outer(d, d)


def _det2(b: np.ndarray) -> float:
    return float(b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0])


def _local_normal_form(m: np.ndarray) -> np.ndarray:
    """Apply a local symplectic map per mode so that each diagonal block is ``nu I``.

    A shear removes the x-p correlation of the block and a squeeze equalises
    the remaining variances. Entanglement is invariant under local maps, and
    the result has O(1) entries even when the input is strongly sheared by
    free spreading.
    """
    s = np.zeros((4, 4))
    for k in (0, 2):
        p, q = m[k, k], m[k, k + 1]
        d = _det2(m[k : k + 2, k : k + 2])
        if not (p > 0 and d > 0):
            raise NonPhysicalCovariance("local covariance block is not positive definite")
        lam = np.sqrt(np.sqrt(d) / p)
        s[k, k] = lam
        s[k + 1, k] = -q / (lam * p)
        s[k + 1, k + 1] = 1.0 / lam
    return s @ m @ s.T


_OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
_TRANSPOSE_B = np.diag([1.0, 1.0, 1.0, -1.0])


def _symplectic_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Ascending symplectic eigenvalues of a positive-definite 4x4 matrix.

    They are the positive eigenvalues of the Hermitian matrix
    ``m^(1/2) (i Omega) m^(1/2)``, which keeps absolute rounding errors at
    machine precision even when the two values nearly coincide.
    """
    w, v = np.linalg.eigh(m)
    if w.min() <= 0:
        raise NonPhysicalCovariance("covariance matrix is not positive definite")
    root = (v * np.sqrt(w)) @ v.T
    ev = np.linalg.eigvalsh(root @ (1j * _OMEGA) @ root)
    return np.sort(ev[ev > 0])


def symplectic_spectrum(cov, hbar: float = HBAR_C) -> SymplecticSpectrum:
    """Symplectic eigenvalues of the partial transpose of ``cov``.

    Partial transposition flips the sign of ``det(gamma)`` in the seralian
    invariant; ``det(sigma)`` is unchanged. The eigenvalues themselves come
    from a Hermitian eigenproblem on the local normal form (see
    :func:`_symplectic_eigenvalues`); the invariants are reported alongside
    and satisfy ``2 nu^2 = S +- sqrt(S^2 - 4 det)``.
    """
    m = _local_normal_form(_dimensionless(_as_matrix(cov), hbar))
    pt = _TRANSPOSE_B @ m @ _TRANSPOSE_B
    lo, hi = _symplectic_eigenvalues(pt)
    det = float(np.linalg.det(m))
    sigma_tilde = _det2(m[:2, :2]) + _det2(m[2:, 2:]) - 2 * _det2(m[:2, 2:])
    return SymplecticSpectrum(float(lo), float(hi), sigma_tilde, det)


def _check_physical(m: np.ndarray, tol: float) -> None:
    lo = _symplectic_eigenvalues(m)[0]
    if lo < 0.5 * (1 - tol):
        raise NonPhysicalCovariance(
            f"smallest symplectic eigenvalue {lo:.12f} hbar is below hbar/2"
        )


_ROUNDOFF_FLOOR = 16 * np.finfo(float).eps


def log_negativity(cov, hbar: float = HBAR_C, tol: float = 1e-6) -> float:
    """Logarithmic negativity ``max(0, -log2(nu_- / (hbar/2)))``.

    Raises :class:`NonPhysicalCovariance` when ``cov`` itself violates the
    uncertainty relation by more than ``tol`` (relative), rather than
    reporting a meaningless value.
    """
    m = _local_normal_form(_dimensionless(_as_matrix(cov), hbar))
    _check_physical(m, tol)
    lo, _ = _symplectic_eigenvalues(_TRANSPOSE_B @ m @ _TRANSPOSE_B)
    # a product state lands a few ulp either side of the bound; that is not entanglement
    if 2.0 * lo >= 1.0 - _ROUNDOFF_FLOOR:
        return 0.0
    return float(-np.log2(2.0 * lo))


def entropy_function(x):
    """``(x+1/2) log2(x+1/2) - (x-1/2) log2(x-1/2)``, continuous at x = 1/2."""
    y = np.asarray(x, dtype=float) - 0.5
    if np.any(y < 0):
        raise ValueError("entropy function needs x >= 1/2")
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0)), 0.0)
    out = ((1 + y) * np.log1p(y) - tail) / _LN2
    return out[()] if out.ndim == 0 else out


def gaussian_entropy(
    cov, hbar: float = HBAR_C, tol: float = 1e-9, purity_tol: float | None = 1e-6
) -> float:
    """Entanglement entropy of a pure two-mode Gaussian state, in bits.

    Computed from the local block alone, ``f(sqrt(det alpha)/hbar)``. With
    ``purity_tol`` set, the global state must satisfy
    ``det(sigma) = (hbar/2)^4`` to that relative tolerance.
    """
    m = _local_normal_form(_dimensionless(_as_matrix(cov), hbar))
    if purity_tol is not None:
        det = float(np.linalg.det(m))
        if abs(16.0 * det - 1.0) > purity_tol:
            raise NonPhysicalCovariance(
                f"state is not pure: 16 det(sigma)/hbar^4 - 1 = {16 * det - 1:.3e}"
            )
    da = _det2(m[:2, :2])
    x = np.sqrt(da) if da > 0 else 0.0
    if x < 0.5 * (1 - tol):
        raise NonPhysicalCovariance(f"local mode has sqrt(det alpha)/hbar = {x:.12f} < 1/2")
    return float(entropy_function(max(x, 0.5)))


def approx_log_negativity(cfg: ExperimentConfig, t) -> np.ndarray | float:
    """Weak-coupling estimate of the log-negativity, valid for omega << omega0.

    With ``u = omega0 omega^2 t^3 / 6`` the estimate
    ``-log2 sqrt(1 + 2u^2 - 2u sqrt(1 + u^2))`` simplifies to ``asinh(u)/ln 2``,
    which is the form evaluated here.
    """
    u = cfg.omega0 * cfg.omega**2 / 6.0 * np.asarray(t, dtype=float) ** 3
    out = np.arcsinh(u) / _LN2
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ApproximationCheck:
    approx: float
    exact: float
    relative_error: float
    tolerance: float

    @property
    def in_regime(self) -> bool:
        return self.relative_error <= self.tolerance


def compare_approximation(cfg: ExperimentConfig, t: float, tolerance: float = 0.05) -> ApproximationCheck:
    """Compare :func:`approx_log_negativity` with the exact analytic value at ``t``.

    ``in_regime`` is False when the weak-coupling estimate misses by more
    than ``tolerance`` (relative), which flags configurations where omega0
    is not large enough compared to omega.
    """
    exact = log_negativity(covariance_lab(cfg, t))
    approx = float(approx_log_negativity(cfg, t))
    rel = abs(approx - exact) / exact if exact > 0 else abs(approx)
    return ApproximationCheck(approx, exact, rel, tolerance)
