"""Reference computations that share no code with the physics modules.

Everything here works in SI units straight from :mod:`scipy.constants`,
uses different numerical machinery (ODE integration, Gauss-Hermite
quadrature, 50-digit arithmetic) and never imports the rest of the package,
so agreement with the main code paths is meaningful. The test suite freezes
the values; ``centralent oracle`` prints them.
"""
from __future__ import annotations

import mpmath as mp
import numpy as np
from scipy import constants as si
from scipy.integrate import solve_ivp

__all__ = [
    "OSMIUM_DENSITY",
    "radius_mp",
    "omega_si",
    "ehrenfest_relative",
    "gaussian_moment_epsilon",
    "free_packet",
    "log_negativity_mp",
    "gaussian_entropy_mp",
]

OSMIUM_DENSITY = 22587.2  # kg m^-3
HBAR = si.hbar


def radius_mp(mass_kg, rho=OSMIUM_DENSITY, dps: int = 50):
    """Sphere radius in metres at ``dps`` significant digits."""
    with mp.workdps(dps):
        return mp.cbrt(3 * mp.mpf(mass_kg) / (4 * mp.pi * mp.mpf(rho)))


def omega_si(mass_kg: float, separation_m: float) -> float:
    return float(np.sqrt(4 * si.G * mass_kg / separation_m**3))


def ehrenfest_relative(omega: float, sigma: float, mass: float, p0: float,
                       separation: float, t: float, rtol: float = 1e-12, hbar: float = HBAR) -> dict:
    """Integrate the closed moment equations of the relative coordinate.

    SI inputs. The quadratic potential ``V = (m w^2/4) (L r - r^2)`` makes
    the Ehrenfest hierarchy close on ``<r>, <p>, <r^2>, <p^2>`` and
    ``C = <rp + pr>/2``; the relative kinetic energy is ``p^2/m``.
    Returns centred moments in SI.
    """
    # express in units of sigma and hbar/sigma to keep the state O(1)
    xs, ps = sigma, hbar / sigma
    k = 0.25 * mass * omega**2

    def rhs(_, y):
        r, p, r2, p2, c = y
        r_, p_, r2_, p2_, c_ = r * xs, p * ps, r2 * xs**2, p2 * ps**2, c * xs * ps
        # V'(r) = k (L - 2 r)
        dr = 2 * p_ / mass
        dp = -k * (separation - 2 * r_)
        dr2 = 4 * c_ / mass
        dp2 = -2 * k * separation * p_ + 4 * k * c_
        dc = 2 * p2_ / mass - k * separation * r_ + 2 * k * r2_
        return [dr / xs, dp / ps, dr2 / xs**2, dp2 / ps**2, dc / (xs * ps)]

    var_p0 = hbar**2 / (8 * sigma**2)
    y0 = [0.0, -p0 / ps, 2 * sigma**2 / xs**2, (var_p0 + p0**2) / ps**2, 0.0]
    if t == 0:
        y = np.array(y0)
    else:
        sol = solve_ivp(rhs, (0.0, t), y0, method="DOP853", rtol=rtol, atol=1e-14)
        if not sol.success:
            raise RuntimeError(sol.message)
        y = sol.y[:, -1]
    r, p, r2, p2, c = y[0] * xs, y[1] * ps, y[2] * xs**2, y[3] * ps**2, y[4] * xs * ps
    return {"mean_r": r, "mean_p": p, "var_r": r2 - r * r, "var_p": p2 - p * p, "cov_rp": c - r * p}


def gaussian_moment_epsilon(n: int, mean: float, sd: float, separation: float, nodes: int = 40) -> float:
    """``(-1)^n n (n-1) <r^(n-2)> / (2 L^(n-2))`` for a normal r, by Gauss-Hermite quadrature."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    moment = float(np.sum(w * (mean + sd * x) ** (n - 2)) / np.sqrt(2 * np.pi))
    return (-1) ** n * n * (n - 1) * moment / (2 * separation ** (n - 2))


def free_packet(r, t: float, s: float, k0: float, a: float) -> np.ndarray:
    """Free evolution under ``i psi_t = -a psi''`` of ``(2 pi s^2)^(-1/4) exp(-r^2/4s^2 + i k0 r)``.

    ``s`` is the standard deviation of ``|psi|^2`` at t = 0.
    """
    r = np.asarray(r, dtype=float)
    z = 1 + 1j * a * t / s**2
    x = r - 2 * a * k0 * t
    return (2 * np.pi * s**2) ** -0.25 * z**-0.5 * np.exp(-(x**2) / (4 * s**2 * z) + 1j * k0 * (r - a * k0 * t))


def _lab_matrix_mp(omega, omega0, sigma, t, hbar):
    w, w0, s2 = mp.mpf(omega), mp.mpf(omega0), mp.mpf(sigma) ** 2
    t = mp.mpf(t)
    ch, sh = mp.cosh(w * t), mp.sinh(w * t)
    dR = s2 / 2 * (1 + (w0 * t) ** 2)
    dP = hbar**2 / (2 * s2)
    cR = hbar * w0 * t / 2
    dr = 2 * s2 * (ch**2 + (w0 / w) ** 2 * sh**2)
    dp = hbar**2 / (8 * s2) * (ch**2 + (w / w0) ** 2 * sh**2)
    cr = hbar / 4 * (w0 / w + w / w0) * mp.sinh(2 * w * t)
    a, b, c = dR + dr / 4, dP / 4 + dp, (cR + cr) / 2
    d, e, f = dR - dr / 4, dP / 4 - dp, (cR - cr) / 2
    return mp.matrix([[a, c, d, f], [c, b, f, e], [d, f, a, c], [f, e, c, b]])


def log_negativity_mp(omega: float, omega0: float, sigma: float, t: float, dps: int = 60) -> float:
    """Log-negativity of the two-mode state at rest, evaluated at ``dps`` digits with hbar = 1."""
    with mp.workdps(dps):
        S = _lab_matrix_mp(omega, omega0, sigma, t, mp.mpf(1))
        det = mp.det(S)
        da = S[0, 0] * S[1, 1] - S[0, 1] ** 2
        db = S[2, 2] * S[3, 3] - S[2, 3] ** 2
        dg = S[0, 2] * S[1, 3] - S[0, 3] * S[1, 2]
        st = da + db - 2 * dg
        nu2 = (st - mp.sqrt(st**2 - 4 * det)) / 2
        return float(max(mp.mpf(0), -mp.log(2 * mp.sqrt(nu2), 2)))


def gaussian_entropy_mp(omega: float, omega0: float, sigma: float, t: float, dps: int = 60) -> float:
    """Entropy of one mode of the same state, in bits."""
    with mp.workdps(dps):
        S = _lab_matrix_mp(omega, omega0, sigma, t, mp.mpf(1))
        x = mp.sqrt(S[0, 0] * S[1, 1] - S[0, 1] ** 2)
        if x <= mp.mpf(1) / 2:
            return 0.0
        lo, hi = x - mp.mpf(1) / 2, x + mp.mpf(1) / 2
        return float(hi * mp.log(hi, 2) - lo * mp.log(lo, 2))
