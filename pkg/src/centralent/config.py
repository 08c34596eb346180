"""Validated experiment configuration shared by every other module."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from . import units
from .units import C_PM_PER_S, G_RATE, HBAR_C, LEGEND_RATE

__all__ = ["ConfigError", "ExperimentConfig", "characteristic_frequencies"]


class ConfigError(ValueError):
    """Raised for configurations that violate a physical or structural invariant."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Two identical spheres released from identical harmonic-trap ground states.

    All fields are in internal units: ``mass`` and ``p0`` in keV (rest energy
    and ``p c``), lengths in pm, ``t_max`` in s. Use :meth:`from_si` to build
    one from laboratory quantities.

    ``p0 > 0`` means the masses move towards each other.
    """

    mass: float
    separation: float
    sigma: float
    p0: float = 0.0
    t_max: float = 5.0
    order: int = 2
    material_radius: float | None = None

    def __post_init__(self):
        for name in ("mass", "separation", "sigma"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive and finite, got {v!r}")
        if not (np.isfinite(self.t_max) and self.t_max >= 0):
            raise ConfigError(f"t_max must be >= 0, got {self.t_max!r}")
        if not np.isfinite(self.p0):
            raise ConfigError(f"p0 must be finite, got {self.p0!r}")
        if int(self.order) != self.order or self.order < 1:
            raise ConfigError(f"order must be an integer >= 1, got {self.order!r}")
        if self.material_radius is not None:
            if not self.material_radius > 0:
                raise ConfigError("material_radius must be positive")
            if self.separation <= 2 * self.material_radius:
                raise ConfigError(
                    f"spheres overlap: separation {self.separation:g} pm <= "
                    f"2 * radius {2 * self.material_radius:g} pm"
                )

    @classmethod
    def from_si(
        cls,
        mass_kg: float,
        sigma_m: float,
        *,
        separation_m: float | None = None,
        radius_multiple: float | None = None,
        rho: float = units.RHO_OSMIUM,
        p0_multiple: float | None = None,
        p0_rate: float | None = None,
        p0_si: float | None = None,
        t_max: float = 5.0,
        order: int = 2,
    ) -> ExperimentConfig:
        """Build a configuration from SI inputs.

        Exactly one of ``separation_m`` / ``radius_multiple`` fixes L; with
        ``radius_multiple`` the sphere radius follows from ``rho``. The
        momentum is given by at most one of ``p0_multiple`` (in units of
        :data:`~centralent.units.LEGEND_RATE` for p0/mL), ``p0_rate``
        (p0/mL in s^-1) or ``p0_si`` (kg m/s).
        """
        if (separation_m is None) == (radius_multiple is None):
            raise ConfigError("give exactly one of separation_m or radius_multiple")
        if sum(x is not None for x in (p0_multiple, p0_rate, p0_si)) > 1:
            raise ConfigError("give at most one of p0_multiple, p0_rate, p0_si")
        if not mass_kg > 0:
            raise ConfigError(f"mass must be positive, got {mass_kg!r}")
        radius = None
        if radius_multiple is not None:
            radius = units.m_to_pm(units.radius_from_mass(mass_kg, rho))
            separation = radius_multiple * radius
        else:
            separation = units.m_to_pm(separation_m)
        mass = units.kg_to_kev(mass_kg)
        if p0_multiple is not None:
            p0_rate = p0_multiple * LEGEND_RATE
        if p0_rate is not None:
            p0 = p0_rate * mass * separation / C_PM_PER_S
        elif p0_si is not None:
            p0 = units.momentum_si_to_kev(p0_si)
        else:
            p0 = 0.0
        return cls(
            mass=mass,
            separation=separation,
            sigma=units.m_to_pm(sigma_m),
            p0=p0,
            t_max=t_max,
            order=order,
            material_radius=radius,
        )

    def with_(self, **changes) -> ExperimentConfig:
        return replace(self, **changes)

    # derived quantities -------------------------------------------------

    @cached_property
    def omega(self) -> float:
        """Gravitational frequency sqrt(4 G m / L^3), s^-1."""
        return float(np.sqrt(4.0 * G_RATE * self.mass / self.separation**3))

    @cached_property
    def omega0(self) -> float:
        """Trap frequency hbar / (2 m sigma^2), s^-1."""
        return HBAR_C * C_PM_PER_S / (2.0 * self.mass * self.sigma**2)

    @property
    def kinetic_rate(self) -> float:
        """hbar/m in pm^2/s; the relative coordinate obeys i dpsi/dt = -(hbar/m) psi'' + ..."""
        return HBAR_C * C_PM_PER_S / self.mass

    @property
    def p0_rate(self) -> float:
        """p0 / (m L) in s^-1."""
        return self.p0 * C_PM_PER_S / (self.mass * self.separation)

    @property
    def p0_multiple(self) -> float:
        return self.p0_rate / LEGEND_RATE

    def velocity(self, p: float, mass: float | None = None) -> float:
        """Velocity (pm/s) of momentum ``p`` (keV) carried by ``mass`` (keV, default m)."""
        return p * C_PM_PER_S / (self.mass if mass is None else mass)

    def to_si(self) -> dict:
        """Resolved parameters in SI, for manifests and CSV headers."""
        out = {
            "mass_kg": units.kev_to_kg(self.mass),
            "separation_m": units.pm_to_m(self.separation),
            "sigma_m": units.pm_to_m(self.sigma),
            "p0_kg_m_s": units.momentum_kev_to_si(self.p0),
            "p0_over_mL_per_s": self.p0_rate,
            "p0_multiple": self.p0_multiple,
            "t_max_s": self.t_max,
            "order": int(self.order),
            "omega_per_s": self.omega,
            "omega0_per_s": self.omega0,
        }
        if self.material_radius is not None:
            out["radius_m"] = units.pm_to_m(self.material_radius)
        return out


def characteristic_frequencies(cfg: ExperimentConfig) -> tuple[float, float]:
    """Return ``(omega, omega0)`` in s^-1."""
    return cfg.omega, cfg.omega0
