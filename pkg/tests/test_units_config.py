import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import constants as si

from centralent import oracles
from centralent.config import ConfigError, ExperimentConfig, characteristic_frequencies
from centralent.units import (
    CONSTANTS,
    HBAR_C,
    HBAR_KEV_S,
    LEGEND_RATE,
    RHO_OSMIUM,
    kev_to_kg,
    kg_to_kev,
    m_to_pm,
    momentum_kev_to_si,
    momentum_si_to_kev,
    pm_to_m,
    radius_from_mass,
)

# 50-digit evaluations from centralent.oracles.radius_mp, frozen
RADIUS_025PG = 1.382493189900211e-07
OMEGA_1PG_2P1R = 1.651503196950831e-03


def test_hbar_c_digits():
    assert HBAR_C == 197.3269804
    # CODATA hbar c agrees to the stated digits
    assert HBAR_C == pytest.approx(si.hbar * si.c / (1e3 * si.e) * 1e12, rel=5e-10)
    assert CONSTANTS.hbar == pytest.approx(HBAR_KEV_S)


@given(st.floats(1e-20, 1e-3))
def test_mass_round_trip(m):
    assert kev_to_kg(kg_to_kev(m)) == pytest.approx(m, rel=1e-12)


@given(st.floats(1e-12, 1.0))
def test_length_round_trip(x):
    assert pm_to_m(m_to_pm(x)) == pytest.approx(x, rel=1e-12)


@given(st.floats(-1e-18, 1e-18).filter(lambda v: abs(v) > 1e-40))
def test_momentum_round_trip(p):
    assert momentum_kev_to_si(momentum_si_to_kev(p)) == pytest.approx(p, rel=1e-12)


def test_radius_unit_sphere():
    # 4 pi / 3 g of unit-density material: 1 cm
    assert radius_from_mass(4 * math.pi / 3 * 1e-3, 1000.0) == pytest.approx(0.01, rel=1e-14)


def test_radius_quarter_picogram_matches_high_precision():
    assert radius_from_mass(0.25e-15, RHO_OSMIUM) == pytest.approx(RADIUS_025PG, rel=1e-14)
    assert float(oracles.radius_mp(0.25e-15)) == pytest.approx(RADIUS_025PG, rel=1e-15)


def test_radius_hundred_microgram_is_tenth_of_mm():
    assert radius_from_mass(1e-7, RHO_OSMIUM) == pytest.approx(1e-4, rel=0.05)


@pytest.mark.parametrize("m,rho", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -3.0)])
def test_radius_rejects_non_positive(m, rho):
    with pytest.raises(ValueError):
        radius_from_mass(m, rho)


def test_doubling_separation_scales_omega():
    a = ExperimentConfig.from_si(1e-15, 1e-9, separation_m=1e-6)
    b = ExperimentConfig.from_si(1e-15, 1e-9, separation_m=2e-6)
    assert b.omega / a.omega == pytest.approx(2**-1.5, rel=1e-13)


def test_fig3_frequency_ratio(fig3_cfg):
    omega, omega0 = characteristic_frequencies(fig3_cfg)
    assert omega0 / omega == pytest.approx(25, rel=0.10)


def test_one_picogram_omega_frozen():
    cfg = ExperimentConfig.from_si(1e-15, 1e-9, radius_multiple=2.1)
    assert cfg.omega == pytest.approx(OMEGA_1PG_2P1R, rel=1e-12)


@settings(max_examples=50)
@given(st.floats(1e-18, 1e-9), st.floats(1e-11, 1e-6), st.floats(1.1, 100.0))
def test_frequencies_unit_system_invariant(mass, sigma, multiple):
    cfg = ExperimentConfig.from_si(mass, sigma, radius_multiple=2 * multiple)
    L = 2 * multiple * radius_from_mass(mass, RHO_OSMIUM)
    assert cfg.omega == pytest.approx(oracles.omega_si(mass, L), rel=1e-10)
    # the same hbar as the internal units (HBAR_C is truncated w.r.t. CODATA at 2e-10)
    hbar_si = HBAR_C * 1e3 * si.e * 1e-12 / si.c
    assert cfg.omega0 == pytest.approx(hbar_si / (2 * mass * sigma**2), rel=1e-10)


def test_legend_multiple_round_trip(fig3_cfg):
    cfg = ExperimentConfig.from_si(0.25e-15, 2.5e-9, radius_multiple=2.5, p0_multiple=3.5)
    assert cfg.p0_multiple == pytest.approx(3.5, rel=1e-13)
    assert cfg.p0_rate == pytest.approx(3.5 * LEGEND_RATE, rel=1e-13)
    si_cfg = ExperimentConfig.from_si(0.25e-15, 2.5e-9, radius_multiple=2.5,
                                      p0_si=cfg.to_si()["p0_kg_m_s"])
    assert si_cfg.p0 == pytest.approx(cfg.p0, rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(mass=0.0, separation=1.0, sigma=1.0),
        dict(mass=1.0, separation=-1.0, sigma=1.0),
        dict(mass=1.0, separation=1.0, sigma=0.0),
        dict(mass=1.0, separation=1.0, sigma=1.0, t_max=-1.0),
        dict(mass=1.0, separation=1.0, sigma=1.0, order=0),
        dict(mass=1.0, separation=1.0, sigma=1.0, order=2.5),
        dict(mass=1.0, separation=1.0, sigma=1.0, material_radius=0.5),
        dict(mass=1.0, separation=1.0, sigma=1.0, p0=float("nan")),
    ],
)
def test_invalid_configs_rejected(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_overlapping_spheres_rejected():
    with pytest.raises(ConfigError, match="overlap"):
        ExperimentConfig.from_si(1e-15, 1e-9, radius_multiple=1.9)


def test_from_si_argument_exclusivity():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_si(1e-15, 1e-9)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_si(1e-15, 1e-9, separation_m=1e-6, radius_multiple=3)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_si(1e-15, 1e-9, separation_m=1e-6, p0_multiple=1, p0_si=1e-25)


def test_derived_frequencies_cached(fig3_cfg):
    assert fig3_cfg.omega is fig3_cfg.omega
    assert np.isfinite(fig3_cfg.omega0) and fig3_cfg.omega0 > 0
