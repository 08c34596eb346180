"""Physical constants and conversions between SI and the internal natural units.

Internal units (``c = 1`` for mass and momentum bookkeeping):

=========  ======================  =====================================
quantity   unit                    note
=========  ======================  =====================================
length     pm
time       s
energy     keV
mass       keV                     rest energy ``m c^2``
momentum   keV                     ``p c``
action     keV pm                  ``hbar c`` when paired with ``x p``
=========  ======================  =====================================

Rates such as ``omega`` stay in s^-1, so whenever a mass multiplies a squared
frequency a factor ``1/c^2`` (``c`` in pm/s) appears.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as _si

__all__ = [
    "HBAR_C",
    "C_PM_PER_S",
    "HBAR_KEV_S",
    "KEV_IN_J",
    "G_SI",
    "G_RATE",
    "ALPHA",
    "ELEMENTARY_CHARGE",
    "RHO_OSMIUM",
    "LEGEND_RATE",
    "PhysicalConstants",
    "CONSTANTS",
    "kg_to_kev",
    "kev_to_kg",
    "m_to_pm",
    "pm_to_m",
    "momentum_si_to_kev",
    "momentum_kev_to_si",
    "radius_from_mass",
]

#: hbar*c in keV pm (exact to the digits used by the reference numerics).
HBAR_C = 197.3269804
#: speed of light in pm/s
C_PM_PER_S = _si.c * 1e12
#: hbar in keV s
HBAR_KEV_S = HBAR_C / C_PM_PER_S
KEV_IN_J = 1e3 * _si.e
G_SI = _si.G
#: G expressed so that ``G_RATE * m[keV] / L[pm]**3`` is in s^-2
G_RATE = G_SI * KEV_IN_J / _si.c**2 * 1e36
ALPHA = _si.fine_structure
ELEMENTARY_CHARGE = _si.e
#: density of osmium, kg/m^3 (22.5872 g/cm^3)
RHO_OSMIUM = 22587.2
#: p0/(m L) unit used by the figure legends, s^-1
LEGEND_RATE = 6.18082292e-3


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants in the internal unit system (see module docstring)."""

    hbar_c: float = HBAR_C
    G: float = G_RATE
    alpha: float = ALPHA
    e: float = ELEMENTARY_CHARGE
    c: float = C_PM_PER_S
    rho_osmium: float = RHO_OSMIUM

    @property
    def hbar(self) -> float:
        """hbar in keV s."""
        return self.hbar_c / self.c


CONSTANTS = PhysicalConstants()


def kg_to_kev(m):
    """Mass in kg -> rest energy in keV."""
    return m * (_si.c**2 / KEV_IN_J)


def kev_to_kg(m):
    return m * (KEV_IN_J / _si.c**2)


def m_to_pm(x):
    return x * 1e12


def pm_to_m(x):
    return x * 1e-12


def momentum_si_to_kev(p):
    """kg m/s -> keV (p c)."""
    return p * _si.c / KEV_IN_J


def momentum_kev_to_si(p):
    """keV (p c) -> kg m/s."""
    return p * KEV_IN_J / _si.c


def radius_from_mass(m: float, rho: float) -> float:
    """Radius of a homogeneous sphere, ``(3 m / 4 pi rho)**(1/3)``.

    Units are whatever ``m`` and ``rho`` share (kg and kg/m^3 give metres).
    """
    if not (m > 0 and rho > 0):
        raise ValueError(f"mass and density must be positive, got m={m!r}, rho={rho!r}")
    return float(np.cbrt(3.0 * m / (4.0 * np.pi * rho)))
