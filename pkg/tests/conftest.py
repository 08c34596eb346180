from __future__ import annotations

import numpy as np
import pytest

from centralent.config import ExperimentConfig
from centralent.units import C_PM_PER_S, G_RATE, HBAR_C, kg_to_kev


def config_with_rates(omega: float, omega0: float, mass_kg: float = 1e-15, p0_rate: float = 0.0,
                      t_max: float = 5.0, order: int = 2) -> ExperimentConfig:
    """Configuration hitting prescribed (omega, omega0) for a given mass."""
    m = kg_to_kev(mass_kg)
    sigma = np.sqrt(HBAR_C * C_PM_PER_S / (2.0 * m * omega0))
    L = (4.0 * G_RATE * m / omega**2) ** (1.0 / 3.0)
    p0 = p0_rate * m * L / C_PM_PER_S
    return ExperimentConfig(mass=m, separation=L, sigma=sigma, p0=p0, t_max=t_max, order=order)


@pytest.fixture(scope="session")
def fig3_cfg() -> ExperimentConfig:
    return ExperimentConfig.from_si(0.25e-15, 2.5e-9, radius_multiple=2.5)


@pytest.fixture(scope="session")
def scaled_cfg() -> ExperimentConfig:
    return ExperimentConfig.from_si(1e-15, 1e-10, separation_m=2e-8, t_max=0.5)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
