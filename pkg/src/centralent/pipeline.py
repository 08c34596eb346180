"""Running a scenario end to end and writing its artifacts.

Every run of ``stem`` produces, inside the output directory:

* ``<stem>_analytic.csv`` and/or ``<stem>_numeric.csv``: entanglement traces
  with columns ``t [s], E [1], S [bit], skewness [1]``;
* ``<stem>_moments.csv``: relative-coordinate moments in SI;
* ``<stem>_manifest.json``: every resolved parameter, solver setting, grid
  statistic and the code version, plus a scenario text that replays the run;
* ``<stem>_plot.gp`` when plotting is requested (a gnuplot command file).

Nothing time-dependent (wall clock, host name) is written, so repeated runs
are byte-identical.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bipartite import analyse_snapshot
from .gaussian import covariance_lab, reduced_moments_quadratic
from .measures import gaussian_entropy, log_negativity
from .potentials import expand, interaction_from_spec
from .scenario import Scenario
from .tdse import Propagator, initialize_relative_state, sample_schedule
from .tdse.io import MOMENT_COLUMNS, moment_row
from .units import C_PM_PER_S, KEV_IN_J

__all__ = ["Trace", "RunResult", "analytic_trace", "numeric_run", "run_scenario", "TRACE_COLUMNS"]

TRACE_COLUMNS = ("t [s]", "E [1]", "S [bit]", "skewness [1]")
_MOM_SI = KEV_IN_J / (C_PM_PER_S * 1e-12)


@dataclass
class Trace:
    times: np.ndarray
    E: np.ndarray
    S: np.ndarray
    skewness: np.ndarray

    def rows(self):
        for row in zip(self.times, self.E, self.S, self.skewness):
            yield [repr(float(x) + 0.0) for x in row]  # + 0.0 turns -0.0 into 0.0


@dataclass
class RunResult:
    scenario: Scenario
    analytic: Trace | None = None
    numeric: Trace | None = None
    moments: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    cross_check: dict | None = None


def analytic_trace(sc: Scenario) -> tuple[Trace, list]:
    """Closed-form Gaussian evolution at order 2.

    Uses the quadratic coefficient of the scenario's interaction, so a
    Coulomb or Casimir scenario is handled as long as it is attractive.
    """
    cfg = sc.cfg
    inter = interaction_from_spec(sc.interaction, cfg)
    omega = math.sqrt(inter.omega_sq)
    t = np.asarray(sc.sample_times, dtype=float)
    E = np.empty_like(t)
    S = np.empty_like(t)
    for i, ti in enumerate(t):
        cov = covariance_lab(cfg, ti, omega=omega)
        E[i] = log_negativity(cov)
        S[i] = gaussian_entropy(cov)
    m = reduced_moments_quadratic(cfg, t, omega=omega)
    moments = [
        [ti, mx * 1e-12, vx * 1e-24, mp * _MOM_SI, vp * _MOM_SI**2, c * _MOM_SI * 1e-12, 0.0, 1.0, 0]
        for ti, mx, vx, mp, vp, c in zip(
            t, *(np.broadcast_to(a, t.shape) for a in (m.mean_x, m.var_x, m.mean_p, m.var_p, m.cov_xp))
        )
    ]
    return Trace(t, E, S, np.zeros_like(t)), moments


def numeric_run(sc: Scenario) -> tuple[Trace, list, dict]:
    """Propagate the relative wave function and analyse each sample."""
    cfg = sc.cfg
    inter = interaction_from_spec(sc.interaction, cfg)
    pot = expand(inter, cfg.order, drop_constant=True)
    state = initialize_relative_state(cfg, sc.settings)
    initial_points = state.size
    prop = Propagator(state, pot, cfg.kinetic_rate, sc.settings)
    done = 0
    rows_t, rows_E, rows_S, rows_k, moments = [], [], [], [], []
    for target in sample_schedule(cfg.t_max, sc.settings.dt, times=sc.sample_times):
        if target > done:
            prop.advance(target - done)
            done = target
        st = prop.state.with_(time=target * sc.settings.dt)
        a = analyse_snapshot(cfg, st)
        rows_t.append(st.time)
        rows_E.append(a.E_gaussian_extracted)
        rows_S.append(a.S_schmidt)
        rows_k.append(a.skewness)
        moments.append(moment_row(st))
    grid = {
        "initial_points": initial_points,
        "final_points": prop.state.size,
        "extensions": prop.extensions,
        "min_pivot": prop.min_pivot,
        "steps": done,
        "final_norm": prop.state.norm(),
    }
    trace = Trace(*(np.asarray(x, dtype=float) for x in (rows_t, rows_E, rows_S, rows_k)))
    return trace, moments, grid


def _write_trace(path: Path, trace: Trace) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        w.writerows(trace.rows())
    return path


def _write_moments(path: Path, rows: list) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{n} [{u}]" for n, u in MOMENT_COLUMNS])
        for r in rows:
            w.writerow([v if isinstance(v, int) else repr(float(v)) for v in r])
    return path


def _relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.max(np.abs(a)))
    if scale == 0:
        return float(np.max(np.abs(b)))
    return float(np.max(np.abs(a - b)) / scale)


def _plot_script(sc: Scenario, traces: list[str]) -> str:
    lines = [
        "# gnuplot command file; run with: gnuplot " + f"{sc.stem}_plot.gp",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 't [s]'",
        "set terminal pngcairo size 1200,450",
        f"set output '{sc.stem}.png'",
        "set multiplot layout 1,2",
        "set ylabel 'E'",
        "plot " + ", ".join(f"'{f}' using 1:2 with lines title '{f}'" for f in traces),
        "set ylabel 'S [bit]'",
        "plot " + ", ".join(f"'{f}' using 1:3 with lines title '{f}'" for f in traces),
        "unset multiplot",
    ]
    return "\n".join(lines) + "\n"


def _manifest(res: RunResult) -> dict:
    sc = res.scenario
    out = {
        "code_version": __version__,
        "name": sc.name,
        "stem": sc.stem,
        "pipeline": sc.pipeline,
        "config_si": sc.cfg.to_si(),
        "interaction": sc.interaction,
        "solver": sc.settings.manifest(),
        "sample_times_s": list(sc.sample_times),
        "files": [p.name for p in res.files],
        "scenario_text": sc.to_text(),
    }
    if res.grid:
        out["grid"] = res.grid
    if res.cross_check is not None:
        out["cross_check"] = res.cross_check
    return out


def run_scenario(sc: Scenario, out: Path | None = None) -> RunResult:
    """Run the configured pipeline(s) and write all artifacts."""
    out_dir = Path(out) if out is not None else sc.out
    out_dir.mkdir(parents=True, exist_ok=True)
    res = RunResult(sc)
    if sc.pipeline in ("analytic", "both"):
        res.analytic, res.moments = analytic_trace(sc)
        res.files.append(_write_trace(out_dir / f"{sc.stem}_analytic.csv", res.analytic))
    if sc.pipeline in ("numeric", "both"):
        res.numeric, res.moments, res.grid = numeric_run(sc)
        res.files.append(_write_trace(out_dir / f"{sc.stem}_numeric.csv", res.numeric))
    res.files.append(_write_moments(out_dir / f"{sc.stem}_moments.csv", res.moments))
    if res.analytic is not None and res.numeric is not None:
        gap_E = _relative_gap(res.analytic.E, res.numeric.E)
        gap_S = _relative_gap(res.analytic.S, res.numeric.S)
        res.cross_check = {
            "max_relative_gap_E": gap_E,
            "max_relative_gap_S": gap_S,
            "tolerance": sc.cross_tolerance,
            "agree": bool(gap_E <= sc.cross_tolerance and gap_S <= sc.cross_tolerance),
        }
    if sc.plot:
        script = out_dir / f"{sc.stem}_plot.gp"
        script.write_text(_plot_script(sc, [p.name for p in res.files if not p.name.endswith("_moments.csv")]))
        res.files.append(script)
    manifest = out_dir / f"{sc.stem}_manifest.json"
    res.files.append(manifest)
    manifest.write_text(json.dumps(_manifest(res), indent=2, sort_keys=True) + "\n")
    return res
