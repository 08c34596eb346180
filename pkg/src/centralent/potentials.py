"""Central interactions between the two spheres and their Taylor expansions.

Every interaction here is a sum of terms of two shapes, written in terms of
the displacement ``r`` away from the reference separation ``X``:

* ``V(r) = -C / (X + r)**j``           (power law, attractive for C > 0)
* ``V(r) =  C * log(X + r)``           (what a 1/d force integrates to)

Energies are in keV, lengths in pm, so ``C`` carries keV pm^j. Frequencies
come out in s^-2 via the internal ``1/c^2`` bookkeeping (see :mod:`units`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import ConfigError, ExperimentConfig
from .units import ALPHA, C_PM_PER_S, ELEMENTARY_CHARGE, G_RATE, HBAR_C, KEV_IN_J

__all__ = [
    "InteractionError",
    "PowerTerm",
    "CentralInteraction",
    "ExpandedPotential",
    "gravity_interaction",
    "coulomb_interaction",
    "casimir_interaction",
    "generic_power_interaction",
    "compose",
    "expand",
    "interaction_from_spec",
]


class InteractionError(ValueError):
    """Degenerate or unsupported interaction parameters."""


@dataclass(frozen=True)
class PowerTerm:
    """One ``-C/(X+r)^j`` term, or ``C log(X+r)`` when ``log`` is set."""

    C: float
    X: float
    j: float
    log: bool = False

    def energy(self, r):
        d = self.X + np.asarray(r, dtype=float)
        if self.log:
            return self.C * np.log(d)
        return -self.C / d**self.j

    def taylor(self, order: int) -> np.ndarray:
        """Coefficients ``c_0 .. c_order`` of the expansion about r = 0."""
        c = np.empty(order + 1)
        if self.log:
            c[0] = self.C * np.log(self.X)
            for n in range(1, order + 1):
                c[n] = self.C * (-1.0) ** (n + 1) / (n * self.X**n)
            return c
        # (X + r)^-j = X^-j sum_n binom(-j, n) (r/X)^n, binom(-j, n) = (-1)^n prod (j+k)/(k+1)
        coeff = 1.0
        for n in range(order + 1):
            c[n] = -self.C * coeff / self.X ** (self.j + n)
            coeff *= -(self.j + n) / (n + 1)
        return c


@dataclass(frozen=True)
class CentralInteraction:
    """An interaction reduced to what the dynamics needs.

    ``omega_sq`` (s^-2) is set by the quadratic coefficient,
    ``-c_2 = m omega^2 / 4`` (with m the sphere mass). ``epsilon3_rate``
    (s^-1) is the coefficient k in the weak-field cubic correction
    ``eps3(t) = k t``.
    """

    kind: str
    parameters: dict
    terms: tuple[PowerTerm, ...]
    mass: float
    p0: float
    omega_sq: float
    epsilon3_rate: float | None
    components: tuple["CentralInteraction", ...] = field(default=(), repr=False)

    @property
    def attractive(self) -> bool:
        return self.omega_sq > 0

    def energy(self, r):
        """Exact interaction energy (keV) at displacement ``r`` (pm)."""
        return sum(t.energy(r) for t in self.terms)

    def taylor(self, order: int) -> np.ndarray:
        return sum(t.taylor(order) for t in self.terms)

    def epsilon3(self, t):
        """Weak-field cubic correction at time ``t``; only for attractive forces."""
        if self.epsilon3_rate is None:
            raise InteractionError(
                f"{self.kind}: the cubic correction is only derived for attractive interactions"
            )
        return self.epsilon3_rate * np.asarray(t, dtype=float)

    def epsilon3_from_mean(self, mean_r):
        """Strong-coupling form ``3 (c_3/c_2) <r>``, e.g. ``-3<r>/L`` for gravity.

        ``mean_r`` may come from the analytic first moment or a numerical run.
        """
        if not self.attractive:
            raise InteractionError(f"{self.kind}: repulsive interaction")
        c = self.taylor(3)
        return 3.0 * c[3] / c[2] * np.asarray(mean_r, dtype=float)


def _finish(kind: str, params: dict, terms: Sequence[PowerTerm], cfg: ExperimentConfig,
            components: tuple = ()) -> CentralInteraction:
    c = sum(t.taylor(3) for t in terms)
    omega_sq = -4.0 * c[2] * C_PM_PER_S**2 / cfg.mass
    if omega_sq == 0:
        raise InteractionError(f"{kind}: interaction has no force gradient")
    rate = None
    if omega_sq > 0:
        # <r> ~ -2 p0 t / m along the free trajectory
        rate = -3.0 * c[3] / c[2] * 2.0 * cfg.velocity(cfg.p0)
    return CentralInteraction(kind, dict(params), tuple(terms), cfg.mass, cfg.p0,
                              float(omega_sq), rate, components)


def gravity_interaction(cfg: ExperimentConfig) -> CentralInteraction:
    """Newtonian attraction between the two spheres at centre distance L."""
    gm2 = G_RATE * cfg.mass**2 / C_PM_PER_S**2  # keV pm
    return _finish("gravity", {}, [PowerTerm(gm2, cfg.separation, 1.0)], cfg)


def coulomb_interaction(q1: float, q2: float, cfg: ExperimentConfig) -> CentralInteraction:
    """Point charges ``q1``, ``q2`` in coulomb.

    The product ``q1 q2 > 0`` is taken as the attractive case (the sign
    convention matches the gravitational formula term by term). A negative
    product still expands but has no cubic-correction rate.
    """
    if q1 == 0 or q2 == 0:
        raise InteractionError("coulomb interaction needs two nonzero charges")
    k = ALPHA * HBAR_C * q1 * q2 / ELEMENTARY_CHARGE**2
    return _finish("coulomb", {"q1": q1, "q2": q2}, [PowerTerm(k, cfg.separation, 1.0)], cfg)


def casimir_interaction(R0: float, cfg: ExperimentConfig) -> CentralInteraction:
    """Proximity-force Casimir attraction of two spheres of radius ``R0`` (pm).

    Expanded in the surface gap ``L - 2 R0``.
    """
    gap = cfg.separation - 2.0 * R0
    if not R0 > 0:
        raise InteractionError("sphere radius must be positive")
    if gap <= 0:
        raise InteractionError(f"spheres touch or overlap: L - 2 R0 = {gap:g} pm")
    C = np.pi**3 * HBAR_C * R0 / 1440.0
    return _finish("casimir", {"R0": R0}, [PowerTerm(C, gap, 2.0)], cfg)


def generic_power_interaction(C: float, X: float, j: float, from_force: bool,
                              cfg: ExperimentConfig) -> CentralInteraction:
    """``V = -C/X^j`` (potential branch) or ``F = -C/X^j`` (force branch).

    The force branch integrates the force to a potential: ``-C/((j-1) X^(j-1))``
    for j != 1 and ``C log X`` for j = 1.
    """
    if not (C > 0 and X > 0):
        raise InteractionError("C and X must be positive")
    if j < 1:
        raise InteractionError(f"exponent must be >= 1, got {j}")
    params = {"C": C, "X": X, "j": j, "from_force": from_force}
    if not from_force:
        term = PowerTerm(C, X, float(j))
        kind = "power_potential"
    elif j == 1:
        term = PowerTerm(C, X, 0.0, log=True)
        kind = "power_force"
    else:
        term = PowerTerm(C / (j - 1.0), X, float(j - 1))
        kind = "power_force"
    return _finish(kind, params, [term], cfg)


def compose(interactions: Sequence[CentralInteraction]) -> CentralInteraction:
    """Superpose interactions sharing one configuration.

    ``omega^2`` adds; the cubic rate is the ``omega_k^2``-weighted mean of
    the component rates. Expansion coefficients are summed term by term
    about r = 0 (each component keeps its own reference separation).
    """
    items = list(interactions)
    if not items:
        raise InteractionError("compose needs at least one interaction")
    if any(abs(i.mass - items[0].mass) > 1e-12 * items[0].mass or i.p0 != items[0].p0
           for i in items):
        raise InteractionError("composed interactions must share mass and momentum")
    if len(items) == 1:
        return items[0]
    omega_sq = float(sum(i.omega_sq for i in items))
    if omega_sq == 0:
        raise InteractionError("composite has no net force gradient")
    rate = None
    if omega_sq > 0 and all(i.epsilon3_rate is not None for i in items):
        rate = sum(i.omega_sq * i.epsilon3_rate for i in items) / omega_sq
    elif omega_sq > 0:
        # some component is repulsive; fall back to the coefficient form
        c = sum(i.taylor(3) for i in items)
        rate = -3.0 * c[3] / c[2] * 2.0 * items[0].p0 * C_PM_PER_S / items[0].mass
    terms = tuple(t for i in items for t in i.terms)
    return CentralInteraction("composite", {"kinds": [i.kind for i in items]}, terms,
                              items[0].mass, items[0].p0, omega_sq, rate, tuple(items))


@dataclass(frozen=True)
class ExpandedPotential:
    """Truncated Taylor series ``sum_n c_n r^n`` of an interaction energy.

    ``coefficients[n]`` is in keV / pm^n. With ``drop_constant`` the n = 0
    entry is zero; it only shifts the global phase of the wave function and
    costs precision in the higher terms.
    """

    coefficients: np.ndarray
    order: int
    reference_separation: float
    drop_constant: bool = True

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        acc = np.zeros_like(r)
        for c in self.coefficients[::-1]:
            acc = acc * r + c
        return acc

    def derivative_coefficients(self, k: int = 1) -> np.ndarray:
        c = np.array(self.coefficients, dtype=float)
        for _ in range(k):
            c = c[1:] * np.arange(1, len(c))
        return c

    def force_gradient(self, r):
        """``F'(r) = -V''(r)`` in keV/pm^2."""
        c = self.derivative_coefficients(2)
        r = np.asarray(r, dtype=float)
        acc = np.zeros_like(r)
        for ck in c[::-1]:
            acc = acc * r + ck
        return -acc

    def rates(self) -> np.ndarray:
        """Coefficients divided by hbar, in s^-1 / pm^n, as the propagator uses them."""
        return self.coefficients * (C_PM_PER_S / HBAR_C)


def expand(interaction: CentralInteraction, N: int, drop_constant: bool = True,
           reference_separation: float | None = None) -> ExpandedPotential:
    """Expand ``interaction`` about r = 0 through order ``N``."""
    if int(N) != N or N < 1:
        raise InteractionError(f"expansion order must be an integer >= 1, got {N!r}")
    c = np.asarray(interaction.taylor(int(N)), dtype=float).copy()
    if drop_constant:
        c[0] = 0.0
    ref = reference_separation
    if ref is None:
        ref = interaction.terms[0].X
    return ExpandedPotential(c, int(N), float(ref), drop_constant)


def interaction_from_spec(spec: dict, cfg: ExperimentConfig) -> CentralInteraction:
    """Build an interaction from scenario keys (``interaction = ...`` plus parameters).

    Lengths in ``spec`` are SI metres and charges coulomb; the constant ``C``
    of the power-law kinds is given in J m^j.
    """
    kind = str(spec.get("interaction", "gravity")).strip()
    if kind == "gravity":
        return gravity_interaction(cfg)
    if kind == "coulomb":
        return coulomb_interaction(float(spec["q1"]), float(spec["q2"]), cfg)
    if kind == "casimir":
        r0 = spec.get("casimir_radius")
        if r0 is None:
            if cfg.material_radius is None:
                raise ConfigError("casimir needs casimir_radius or separation_mode = radius_multiple")
            r0_pm = cfg.material_radius
        else:
            r0_pm = float(r0) * 1e12
        return casimir_interaction(r0_pm, cfg)
    if kind in ("power_potential", "power_force"):
        j = float(spec["j"])
        C = float(spec["C"]) / KEV_IN_J * 1e12**j
        X = float(spec.get("X", cfg.separation * 1e-12)) * 1e12
        return generic_power_interaction(C, X, j, kind == "power_force", cfg)
    if kind == "composite":
        parts = [p.strip() for p in str(spec["components"]).split(",") if p.strip()]
        return compose([interaction_from_spec({**spec, "interaction": p}, cfg) for p in parts])
    raise ConfigError(f"unknown interaction kind {kind!r}")

