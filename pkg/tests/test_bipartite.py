import csv
import functools
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centralent.bipartite import (
    BipartiteGrid,
    CoverageError,
    FreeComState,
    SchmidtError,
    analyse_snapshot,
    assemble_bipartite,
    hybrid_covariance,
    numeric_covariance,
    schmidt_entropy,
    skewness,
    write_analysis_csv,
)
from centralent.config import ExperimentConfig
from centralent.gaussian import covariance_lab
from centralent.measures import gaussian_entropy, log_negativity
from centralent.potentials import gravity_interaction
from centralent.tdse import SolverSettings, WaveGrid, propagate
from centralent.units import HBAR_C

TIMES = [0.0, 0.25, 1.0, 2.5, 5.0]


def fig3(p0_multiple=0.0, order=2):
    return ExperimentConfig.from_si(0.25e-15, 2.5e-9, radius_multiple=2.5,
                                    p0_multiple=p0_multiple, t_max=5.0, order=order)


def run(cfg, times=TIMES):
    st = SolverSettings(dt=2.5e-3, spacing=cfg.sigma / 40)
    return list(propagate(cfg, gravity_interaction(cfg), sample_times=times, settings=st))


@pytest.fixture(scope="module")
def quadratic_runs():
    return {m: (fig3(m), run(fig3(m))) for m in (0.0, 3.5, -3.5)}


def lattice(cfg, snap, **kw):
    return assemble_bipartite(FreeComState.from_config(cfg), snap, separation=cfg.separation, **kw)


def off_diagonal_scale(cov):
    d = np.diag(cov.elements)
    return np.sqrt(np.outer(d, d))


# --- Schmidt decomposition -------------------------------------------------------

def test_product_state_has_one_schmidt_weight(quadratic_runs):
    cfg, snaps = quadratic_runs[0.0]
    S, spec = schmidt_entropy(lattice(cfg, snaps[0]))
    assert S == 0.0
    assert spec.rank_used == 1
    assert spec.lambdas[0] == pytest.approx(1.0, abs=1e-7)


def test_maximally_mixed_two_level_pair():
    env = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex) / np.sqrt(2)
    bg = BipartiteGrid(env, 1.0, 1.0, 0.0, 0.0, 0.0)
    S, spec = schmidt_entropy(bg)
    assert S == pytest.approx(1.0, rel=1e-15)
    np.testing.assert_allclose(spec.lambdas, [0.5, 0.5], rtol=1e-15)


@pytest.mark.parametrize("p0", [0.0, 3.5, -3.5])
def test_schmidt_matches_gaussian_entropy(quadratic_runs, p0):
    cfg, snaps = quadratic_runs[p0]
    for snap in snaps[1:]:
        S, spec = schmidt_entropy(lattice(cfg, snap))
        ref = gaussian_entropy(covariance_lab(cfg, snap.time))
        assert S == pytest.approx(ref, rel=0.01)
        assert 1.0 - spec.captured_norm <= 1e-7


def test_schmidt_spectrum_is_descending_and_capture_monotone(quadratic_runs):
    cfg, snaps = quadratic_runs[3.5]
    bg = lattice(cfg, snaps[-1])
    _, spec = schmidt_entropy(bg)
    assert np.all(np.diff(spec.lambdas) <= 0)
    assert np.all(spec.lambdas >= 0)
    full = np.linalg.svd(bg.envelope * np.sqrt(bg.spacing_A * bg.spacing_B), compute_uv=False) ** 2
    assert np.all(np.diff(np.cumsum(full)) >= 0)


def test_entropy_stable_beyond_capture_rank(quadratic_runs):
    cfg, snaps = quadratic_runs[0.0]
    for snap in snaps[1:]:
        bg = lattice(cfg, snap)
        S, spec = schmidt_entropy(bg)
        S_all, spec_all = schmidt_entropy(bg, tail_relative=0.0, tail_floor=0.0)
        assert spec_all.rank_used > spec.rank_used
        assert abs(S_all - S) < 1e-8


def test_capture_failure_is_reported():
    env = np.eye(4, dtype=complex) / 2.0
    with pytest.raises(SchmidtError):
        schmidt_entropy(BipartiteGrid(env, 1.0, 1.0, 0.0, 0.0, 0.0), max_rank=3)


def test_swap_symmetry(quadratic_runs):
    cfg, snaps = quadratic_runs[3.5]
    bg = lattice(cfg, snaps[-1])
    S, a = schmidt_entropy(bg)
    S_swapped, b = schmidt_entropy(bg.swapped())
    assert S_swapped == pytest.approx(S, rel=1e-12)
    np.testing.assert_allclose(a.lambdas, b.lambdas, rtol=1e-10)


def test_shifted_relative_packet_leaves_spectrum_unchanged(quadratic_runs):
    cfg, snaps = quadratic_runs[0.0]
    snap = snaps[-1]
    shifted = snap.with_(origin=snap.origin + 37 * snap.spacing)
    S, a = schmidt_entropy(lattice(cfg, snap))
    S2, b = schmidt_entropy(lattice(cfg, shifted))
    assert S2 == pytest.approx(S, rel=1e-10)
    np.testing.assert_allclose(a.lambdas, b.lambdas, rtol=1e-8)


def test_cubic_resampling_agrees_with_aligned_lattice(quadratic_runs):
    cfg, snaps = quadratic_runs[0.0]
    snap = snaps[-1]
    S_al, _ = schmidt_entropy(lattice(cfg, snap))
    S_cu, _ = schmidt_entropy(lattice(cfg, snap, method="cubic", lattice_spacing=snap.spacing * 12.3))
    assert S_cu == pytest.approx(S_al, rel=1e-4)
    with pytest.raises(ValueError):
        lattice(cfg, snap, method="nearest")


def test_narrow_window_is_a_coverage_error(quadratic_runs):
    cfg, snaps = quadratic_runs[0.0]
    with pytest.raises(CoverageError):
        lattice(cfg, snaps[-1], nsd=2.0)


# --- lattice covariance ----------------------------------------------------------

def test_release_covariance(quadratic_runs):
    cfg, snaps = quadratic_runs[3.5]
    cov = numeric_covariance(lattice(cfg, snaps[0]))
    s2, hb = cfg.sigma**2, HBAR_C
    expected = np.diag([s2, hb**2 / (4 * s2), s2, hb**2 / (4 * s2)])
    np.testing.assert_allclose(cov.elements, expected, rtol=1e-6, atol=1e-6 * hb)
    x_a, p_a, x_b, p_b = cov.first_moments
    assert x_a == pytest.approx(-cfg.separation / 2, rel=1e-12)
    assert x_b == pytest.approx(cfg.separation / 2, rel=1e-12)
    assert p_a == pytest.approx(cfg.p0, rel=1e-6)
    assert p_b == pytest.approx(-cfg.p0, rel=1e-6)


@pytest.mark.parametrize("p0", [0.0, 3.5])
def test_lattice_covariance_matches_closed_form(quadratic_runs, p0):
    cfg, snaps = quadratic_runs[p0]
    for snap in snaps:
        ref = covariance_lab(cfg, snap.time)
        got = numeric_covariance(lattice(cfg, snap))
        assert np.max(np.abs(got.elements - ref.elements) / off_diagonal_scale(ref)) < 1e-4
        hyb = hybrid_covariance(cfg, snap)
        assert np.max(np.abs(hyb.elements - ref.elements) / off_diagonal_scale(ref)) < 1e-7


@functools.lru_cache(maxsize=1)
def drifting_snapshot():
    cfg = fig3(1.75)
    return cfg, run(cfg, [5.0])[0]


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.3, 0.3))
def test_galilean_boost_leaves_centred_moments(qh):
    cfg, snap = drifting_snapshot()
    bg = lattice(cfg, snap)
    q = qh / bg.spacing_A
    boosted = replace(bg, envelope=bg.envelope * np.exp(1j * q * (bg.positions_A[:, None] + bg.positions_B[None, :])))
    a, b = numeric_covariance(bg), numeric_covariance(boosted)
    assert np.max(np.abs(a.elements - b.elements) / off_diagonal_scale(a)) < 1e-12
    shift = b.first_moments - a.first_moments
    assert shift[1] == pytest.approx(HBAR_C * q, rel=1e-9, abs=1e-12 * HBAR_C / cfg.sigma)
    assert shift[3] == pytest.approx(HBAR_C * q, rel=1e-9, abs=1e-12 * HBAR_C / cfg.sigma)


# --- skewness ----------------------------------------------------------------------

def test_gaussian_has_no_skew():
    x = np.linspace(-20, 20, 801)
    g = WaveGrid(np.exp(-((x - 0.3) ** 2) / 8).astype(complex), x[1] - x[0], x[0])
    assert abs(skewness(g)) < 1e-8


def test_quadratic_evolution_stays_symmetric(quadratic_runs):
    for cfg, snaps in quadratic_runs.values():
        assert max(abs(skewness(s)) for s in snaps) < 1e-6


@pytest.fixture(scope="module")
def cubic_run():
    cfg = fig3(order=3)
    return cfg, run(cfg, [0.5 * k for k in range(11)])


def test_cubic_evolution_skews_negative_and_steepens(cubic_run):
    _, snaps = cubic_run
    mu = np.array([skewness(s) for s in snaps[1:]])
    assert np.all(mu < 0)
    assert np.all(np.diff(np.abs(mu)) > 0)


def test_cubic_negativity_ordered_by_momentum():
    E = {}
    for m in (-3.5, 0.0, 3.5):
        cfg = fig3(m, order=3)
        snap = run(cfg, [5.0])[0]
        E[m] = log_negativity(numeric_covariance(lattice(cfg, snap)))
    assert E[3.5] > E[0.0] > E[-3.5] > 0


# --- table output ------------------------------------------------------------------

def test_analysis_rows(tmp_path, quadratic_runs):
    cfg, snaps = quadratic_runs[0.0]
    rows = [analyse_snapshot(cfg, s) for s in snaps]
    assert rows[0].S_schmidt == 0.0 and rows[0].E_gaussian_extracted == 0.0
    assert rows[-1].E_gaussian_extracted == pytest.approx(log_negativity(covariance_lab(cfg, 5.0)), rel=1e-4)
    path = write_analysis_csv(tmp_path / "a.csv", rows, n_lambda=3)
    table = list(csv.reader(path.open()))
    assert table[0][:4] == ["t [s]", "E_gaussian_extracted [1]", "S_schmidt [bit]", "skewness [1]"]
    assert table[0][-1] == "lambda_3 [1]"
    assert len(table) == len(snaps) + 1
    assert float(table[1][6]) == pytest.approx(1.0, abs=1e-7)
    assert float(table[1][7]) == 0.0
