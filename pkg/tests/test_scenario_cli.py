import csv
import json
from pathlib import Path

import numpy as np
import pytest

from centralent import cli
from centralent.gaussian import covariance_lab
from centralent.measures import gaussian_entropy, log_negativity
from centralent.pipeline import run_scenario
from centralent.scenario import (
    ScenarioError,
    build_scenario,
    expand_grid,
    load_scenario,
    parse_grid,
    parse_text,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

SHORT = """\
name            = short
mass            = 0.25e-15
separation_mode = radius_multiple
radius_multiple = 2.5
sigma           = 2.5e-9
p0_multiple     = 0
order           = 2
t_max           = 0.5
cadence         = 0.25
dt              = 2.5e-3
pipeline        = both
"""


def write(tmp_path, text, name="s.scn"):
    p = tmp_path / name
    p.write_text(text)
    return p


def short(tmp_path, extra="", drop=()):
    lines = [ln for ln in SHORT.splitlines() if ln.split("=")[0].strip() not in drop]
    return write(tmp_path, "\n".join(lines) + "\n" + extra + f"out = {tmp_path / 'out'}\n")


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --- parsing ---------------------------------------------------------------------

@pytest.mark.parametrize("text, fragment", [
    ("mass = 1\nspeed = 3\n", ":2: unknown key 'speed'"),
    ("mass = 1\n\n# c\nmass = 2\n", ":4: duplicate key 'mass'"),
    ("sigma =   # nothing\n", ":1: empty value for 'sigma'"),
    ("mass 1e-15\n", ":1: expected 'key = value'"),
])
def test_parse_errors_carry_line_numbers(text, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        parse_text(text, "f.scn")


def test_comments_and_blank_lines():
    raw = parse_text("# header\n\n  mass = 1e-15   # kg\nname=x#y\n")
    assert raw == {"mass": "1e-15", "name": "x"}


@pytest.mark.parametrize("drop, extra, fragment", [
    (("mass",), "", "missing required key 'mass'"),
    (("sigma",), "", "missing required key 'sigma'"),
    ((), "separation = 3e-7\n", "'separation' given with separation_mode = radius_multiple"),
    (("separation_mode",), "", "separation_mode = absolute needs 'separation'"),
    (("separation_mode", "radius_multiple"), "separation_mode = orbit\n", "separation_mode must be"),
    ((), "p0_absolute = 1e-30\n", "p0_multiple or p0_absolute, not both"),
    (("order",), "order = 3\n", "analytic pipeline is exact only at order 2"),
    (("cadence",), "cadence = 0.3\n", "whole number of cadence intervals"),
    (("dt",), "dt = 0.1\n", "not a multiple of dt"),
    (("pipeline",), "pipeline = quantum\n", "pipeline must be one of"),
    ((), "times = 0, 0.1\n", "cadence or times, not both"),
    (("cadence",), "times = 0, 0.75\n", r"lie in \[0, t_max\]"),
    (("name",), "name = a b\n", "name must not contain"),
    (("order",), "order = 2.5\n", "bad value for 'order'"),
    ((), "interaction = coulomb\nq1 = 1e-15\nq2 = -1e-15\n", "attractive quadratic term"),
])
def test_invalid_scenarios(tmp_path, drop, extra, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        load_scenario(short(tmp_path, extra, drop))


def test_defaults_are_resolved(tmp_path):
    sc = load_scenario(short(tmp_path, drop=("dt", "cadence")))
    assert sc.sample_times[0] == 0.0 and sc.sample_times[-1] == pytest.approx(0.5)
    assert len(sc.sample_times) == 21
    steps = sc.sample_times[1] / sc.settings.dt
    assert steps == pytest.approx(round(steps), abs=1e-9)
    assert sc.cfg.omega0 * sc.settings.dt <= 1e-4 * (1 + 1e-12)
    assert sc.settings.spacing == pytest.approx(2.5e-9 / 40 * 1e12, rel=1e-14)
    assert sc.resolved()["interaction"] == "gravity"


def test_explicit_times_pick_a_common_step(tmp_path):
    sc = load_scenario(short(tmp_path, "times = 0.5, 0, 0.2\n", drop=("dt", "cadence")))
    assert sc.sample_times == (0.0, 0.2, 0.5)
    for t in sc.sample_times:
        assert t / sc.settings.dt == pytest.approx(round(t / sc.settings.dt), abs=1e-9)


def test_overrides_win(tmp_path):
    sc = load_scenario(short(tmp_path), {"order": 3, "pipeline": "numeric", "dt": "1.25e-3"})
    assert sc.cfg.order == 3 and sc.pipeline == "numeric" and sc.settings.dt == 1.25e-3


def test_to_text_round_trip(tmp_path):
    sc = load_scenario(short(tmp_path, "p0_multiple = -1.75\n", drop=("p0_multiple",)))
    again = build_scenario(parse_text(sc.to_text()))
    assert again.cfg == sc.cfg
    assert again.settings == sc.settings
    assert again.sample_times == pytest.approx(sc.sample_times, rel=0, abs=1e-15)
    assert again.pipeline == sc.pipeline and again.out == sc.out
    assert again.to_text() == sc.to_text()


@pytest.mark.parametrize("m, stem", [(0.0, "fig3_N2_p0+0.00"), (1.75, "fig3_N2_p0+1.75"),
                                     (-3.5, "fig3_N2_p0-3.50")])
def test_stem_follows_legend_multiple(m, stem):
    sc = load_scenario(SCENARIOS / "fig3.scn", {"p0_multiple": m})
    assert sc.stem == stem


def test_grid_files():
    grid = parse_grid(SCENARIOS / "p0_sweep.grid")
    assert grid == {"p0_multiple": ["0", "1.75", "-1.75", "3.5", "-3.5"]}
    pts = expand_grid({"order": ["2", "3"], "p0_multiple": ["0", "1"]})
    assert pts == [{"order": "2", "p0_multiple": "0"}, {"order": "2", "p0_multiple": "1"},
                   {"order": "3", "p0_multiple": "0"}, {"order": "3", "p0_multiple": "1"}]
    assert parse_grid("times = 0, 1\n") == {"times": ["0, 1"]}
    with pytest.raises(ScenarioError):
        parse_grid("# only a comment\n")


def test_shipped_scenarios_validate():
    for path in sorted(SCENARIOS.glob("*.scn")):
        load_scenario(path)


# --- run ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def short_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    path = short(tmp)
    assert cli.main(["run", str(path)]) == 0
    return tmp / "out", load_scenario(path)


def test_run_artifacts(short_run):
    out, sc = short_run
    names = sorted(p.name for p in out.iterdir())
    assert names == ["short_N2_p0+0.00_analytic.csv", "short_N2_p0+0.00_manifest.json",
                     "short_N2_p0+0.00_moments.csv", "short_N2_p0+0.00_numeric.csv"]
    ana = read_csv(out / "short_N2_p0+0.00_analytic.csv")
    assert ana[0] == ["t [s]", "E [1]", "S [bit]", "skewness [1]"]
    assert [float(r[0]) for r in ana[1:]] == [0.0, 0.25, 0.5]
    for row in ana[1:]:
        cov = covariance_lab(sc.cfg, float(row[0]))
        assert float(row[1]) == pytest.approx(log_negativity(cov), rel=1e-14, abs=1e-300)
        assert float(row[2]) == pytest.approx(gaussian_entropy(cov), rel=1e-14, abs=1e-300)
    mom = read_csv(out / "short_N2_p0+0.00_moments.csv")
    assert len(mom) == 4


def test_manifest_records_cross_check_and_replays(short_run):
    out, sc = short_run
    man = json.loads((out / "short_N2_p0+0.00_manifest.json").read_text())
    cc = man["cross_check"]
    assert cc["agree"] is True
    assert cc["max_relative_gap_E"] < 1e-3 and cc["max_relative_gap_S"] < 1e-3
    for key in ("dt_s", "grid_spacing_m", "half_width_sd", "extension_threshold", "max_points", "backend"):
        assert key in man["solver"]
    assert man["grid"]["steps"] == 200
    assert abs(man["grid"]["final_norm"] - 1) < 1e-12
    replay = build_scenario(parse_text(man["scenario_text"]))
    assert replay.cfg == sc.cfg and replay.settings == sc.settings
    assert man["code_version"]


def test_runs_are_byte_identical(short_run):
    out, sc = short_run
    before = {p.name: p.read_bytes() for p in out.iterdir()}
    run_scenario(sc)
    after = {p.name: p.read_bytes() for p in out.iterdir()}
    assert after == before


def test_zero_duration_gives_single_row(tmp_path):
    path = short(tmp_path, "t_max = 0\n", drop=("t_max", "cadence"))
    sc = load_scenario(path)
    res = run_scenario(sc)
    for tr in (res.analytic, res.numeric):
        assert list(tr.times) == [0.0]
        assert tr.E[0] == 0.0 and tr.S[0] == 0.0 and tr.skewness[0] == 0.0
    assert len(read_csv(tmp_path / "out" / f"{sc.stem}_numeric.csv")) == 2


def test_plot_script(tmp_path):
    path = short(tmp_path, "t_max = 0\n", drop=("t_max", "cadence"))
    assert cli.main(["run", str(path), "--plot", "--pipeline", "analytic"]) == 0
    gp = (tmp_path / "out" / "short_N2_p0+0.00_plot.gp").read_text()
    assert "short_N2_p0+0.00_analytic.csv" in gp and "moments" not in gp


def test_summary_printed(tmp_path, capsys):
    assert cli.main(["run", str(short(tmp_path))]) == 0
    text = capsys.readouterr().out
    assert "short_N2_p0+0.00: 3 samples to t = 0.5 s" in text
    assert "agree" in text


# --- exit codes ------------------------------------------------------------------

def test_invalid_scenario_exits_2(tmp_path, capsys):
    assert cli.main(["run", str(short(tmp_path, drop=("mass",)))]) == 2
    assert "missing required key 'mass'" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path, capsys):
    assert cli.main(["validate", str(tmp_path / "nope.scn")]) == 2
    assert "error" in capsys.readouterr().err


def test_solver_failure_exits_3(tmp_path, capsys):
    # 1 fm spacing needs ~7e7 grid points, far above the allowed maximum
    path = short(tmp_path, "grid_spacing = 1e-15\n")
    assert cli.main(["run", str(path), "--pipeline", "numeric"]) == 3
    err = capsys.readouterr().err
    assert "GridError" in err and "max_points" in err


def test_validate_prints_resolved(tmp_path, capsys):
    assert cli.main(["validate", str(short(tmp_path)), "--order", "3", "--pipeline", "numeric"]) == 0
    text = capsys.readouterr().out
    assert "order = 3" in text and "dt = 0.0025" in text
    assert "steps = 200" in text and "ratio 26.5" in text
    body = "\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))
    assert build_scenario(parse_text(body)).cfg.order == 3


@pytest.mark.parametrize("which, needle", [
    ("radius", "radius(m = 0.25 pg, osmium)"),
    ("frequencies", "omega0(0.25 pg, sigma = 2.5 nm)"),
    ("headline", "E(t = 5 s, p0 = 0)"),
    ("ehrenfest", "ehrenfest cov_rp"),
    ("epsilon", "eps_6("),
])
def test_oracle_verbs(capsys, which, needle):
    assert cli.main(["oracle", which]) == 0
    assert needle in capsys.readouterr().out


def test_oracle_frequencies_match_config(capsys, fig3_cfg):
    cli.main(["oracle", "frequencies"])
    lines = capsys.readouterr().out.splitlines()
    assert float(lines[0].split("=")[-1].split()[0]) == pytest.approx(fig3_cfg.omega, rel=1e-12)


# --- sweep ---------------------------------------------------------------------

def sweep(tmp_path, grid_text, scn=None):
    scn = scn or short(tmp_path, drop=("pipeline",))
    grid = write(tmp_path, grid_text, "g.grid")
    code = cli.main(["sweep", str(scn), str(grid)])
    return code, tmp_path / "out"


def test_sweep_of_one_point_matches_run(tmp_path):
    code, out = sweep(tmp_path, "p0_multiple = 0\n")
    assert code == 0
    table = read_csv(out / "short_sweep.csv")
    trace = read_csv(out / "short_N2_p0+0.00_numeric.csv")
    assert [r[4:8] for r in table[1:]] == trace[1:]


def test_sweep_naming_and_ratios(tmp_path):
    code, out = sweep(tmp_path, "p0_multiple = 0, 1.75, -1.75, 3.5, -3.5\n")
    assert code == 0
    for m in ("+0.00", "+1.75", "-1.75", "+3.50", "-3.50"):
        assert (out / f"short_N2_p0{m}_numeric.csv").exists()
    table = read_csv(out / "short_sweep.csv")
    assert table[0] == ["point", "p0_multiple", "status", "error", "t [s]", "E [1]", "S [bit]",
                        "skewness [1]", "S_ratio [1]", "E_ratio [1]"]
    assert len(table) == 1 + 5 * 3
    zero = [r for r in table[1:] if r[1] == "0"]
    assert all(r[8] == "nan" for r in zero[:1])
    assert all(float(r[8]) == 1.0 for r in zero[1:])
    final = {r[1]: float(r[8]) for r in table[1:] if r[4] == "0.5"}
    # quadratic order: momentum only translates the pair, the entropy is unchanged
    for v in final.values():
        assert v == pytest.approx(1.0, abs=1e-3)


def test_sweep_failure_recorded_per_row(tmp_path, capsys):
    # in the lab frame the grid must hold the whole drift: 1e6 multiples cannot fit
    scn = short(tmp_path, "frame = lab\npipeline = numeric\n", drop=("pipeline",))
    code, out = sweep(tmp_path, "p0_multiple = 0, 1e6\n", scn)
    assert code == 1
    table = read_csv(out / "short_sweep.csv")
    ok = [r for r in table[1:] if r[2] == "ok"]
    failed = [r for r in table[1:] if r[2] == "failed"]
    assert len(ok) == 3 and len(failed) == 1
    assert failed[0][0] == "1" and failed[0][3].startswith("GridError")
    assert "failed (GridError" in capsys.readouterr().out


def test_sweep_rejects_colliding_stems(tmp_path, capsys):
    code, _ = sweep(tmp_path, "dt = 2.5e-3, 1.25e-3\n")
    assert code == 2
    assert "same output stem" in capsys.readouterr().err


def test_sweep_validates_before_running(tmp_path):
    code, out = sweep(tmp_path, "cadence = 0.25, 0.3\n")
    assert code == 2
    assert not (out / "short_sweep.csv").exists()


def test_parallel_sweep_matches_serial(tmp_path, monkeypatch):
    serial = tmp_path / "a"
    serial.mkdir()
    code, out_a = sweep(serial, "p0_multiple = 0, 3.5\n")
    assert code == 0
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    par = tmp_path / "b"
    par.mkdir()
    code, out_b = sweep(par, "p0_multiple = 0, 3.5\n")
    assert code == 0
    for p in out_a.iterdir():
        assert (out_b / p.name).read_bytes() == p.read_bytes() or p.suffix == ".json", p.name


def test_sweep_order_grid_is_ordered(tmp_path):
    scn = short(tmp_path, "t_max = 1\np0_multiple = 3.5\npipeline = numeric\n",
                drop=("t_max", "p0_multiple", "pipeline"))
    code, out = sweep(tmp_path, "order = 2, 3, 4\n", scn)
    assert code == 0
    table = read_csv(out / "short_sweep.csv")
    S = {r[1]: float(r[6]) for r in table[1:] if float(r[4]) == 1.0}
    E = {r[1]: float(r[5]) for r in table[1:] if float(r[4]) == 1.0}
    # the cubic term with p0 > 0 raises entanglement; the quartic term adds to it
    assert S["4"] > S["3"] > S["2"] > 0
    assert E["4"] > E["3"] > E["2"] > 0
    assert np.isnan(float(table[1][8]))
