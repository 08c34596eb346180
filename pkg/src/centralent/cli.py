"""Command line entry point: ``centralent run|sweep|validate|oracle``.

Exit codes: 0 success, 1 at least one sweep point failed, 2 invalid
scenario or grid, 3 the solver failed.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError
from .scenario import ScenarioError, Scenario, build_scenario, expand_grid, load_scenario, parse_grid, parse_text

WORKERS_ENV = "CENTRALENT_WORKERS"


def _overrides(args) -> dict:
    o = {}
    if args.dt is not None:
        o["dt"] = args.dt
    if args.grid_spacing is not None:
        o["grid_spacing"] = args.grid_spacing
    if args.order is not None:
        o["order"] = args.order
    if args.pipeline is not None:
        o["pipeline"] = args.pipeline
    if args.out is not None:
        o["out"] = args.out
    if getattr(args, "plot", False):
        o["plot"] = "yes"
    return o


def _summary(res) -> str:
    sc = res.scenario
    parts = [f"{sc.stem}: {len(sc.sample_times)} samples to t = {sc.cfg.t_max:g} s"]
    for label, tr in (("analytic", res.analytic), ("numeric", res.numeric)):
        if tr is not None:
            parts.append(f"  {label:8s} E(t_max) = {tr.E[-1]:.6e}  S(t_max) = {tr.S[-1]:.6e} bit"
                         f"  skewness = {tr.skewness[-1]:.3e}")
    if res.cross_check:
        c = res.cross_check
        parts.append(f"  analytic vs numeric: max gap E {c['max_relative_gap_E']:.2e}, "
                     f"S {c['max_relative_gap_S']:.2e} (tolerance {c['tolerance']:g}) "
                     + ("agree" if c["agree"] else "DISAGREE"))
    parts.append("  wrote " + ", ".join(p.name for p in res.files))
    return "\n".join(parts)


def cmd_run(args) -> int:
    from .pipeline import run_scenario

    sc = load_scenario(args.scenario, _overrides(args))
    res = run_scenario(sc)
    print(_summary(res))
    return 0


def cmd_validate(args) -> int:
    sc = load_scenario(args.scenario, _overrides(args))
    cfg = sc.cfg
    print(sc.to_text(), end="")
    print(f"# omega = {cfg.omega:.9e} s^-1, omega0 = {cfg.omega0:.9e} s^-1, ratio {cfg.omega0 / cfg.omega:.4g}")
    print(f"# p0 = {cfg.p0_multiple:g} x legend rate, steps = {round(cfg.t_max / sc.settings.dt)}")
    return 0


def _sweep_point(job: tuple) -> dict:
    """Run one grid point; never raises, so one failure cannot stop a sweep."""
    index, raw, point, overrides, out_dir = job
    from .pipeline import run_scenario

    row = {"index": index, "point": point, "status": "ok", "error": "", "trace": None, "p0_multiple": None}
    try:
        merged = {**point, **overrides}
        sc = build_scenario(raw, merged)
        row["p0_multiple"] = sc.cfg.p0_multiple
        res = run_scenario(sc, out_dir)
        tr = res.numeric if res.numeric is not None else res.analytic
        row["trace"] = (list(tr.times), list(tr.E), list(tr.S), list(tr.skewness))
    except Exception as exc:  # recorded per row by design
        row["status"] = "failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _ratio(x: float, ref: float | None) -> float:
    if ref is None or ref == 0 or not math.isfinite(ref):
        return float("nan")
    return x / ref


def write_sweep_csv(path: Path, keys: list[str], rows: list[dict]) -> Path:
    """Aggregate table, one line per (grid point, sample time).

    ``S_ratio`` and ``E_ratio`` divide by the grid point that differs only
    by having ``p0_multiple = 0``, when the grid contains one.
    """
    def other(r):
        return tuple((k, r["point"][k]) for k in keys if k != "p0_multiple")

    rest = {}
    for r in rows:
        if r["status"] == "ok" and r["p0_multiple"] == 0:
            rest[other(r)] = r["trace"]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point"] + keys + ["status", "error", "t [s]", "E [1]", "S [bit]", "skewness [1]",
                                       "S_ratio [1]", "E_ratio [1]"])
        for r in rows:
            head = [r["index"]] + [r["point"][k] for k in keys]
            if r["status"] != "ok":
                w.writerow(head + [r["status"], r["error"]] + [""] * 6)
                continue
            ref = rest.get(other(r))
            for i, (t, E, S, k) in enumerate(zip(*r["trace"])):
                sr = _ratio(S, ref[2][i] if ref and i < len(ref[2]) else None)
                er = _ratio(E, ref[1][i] if ref and i < len(ref[1]) else None)
                w.writerow(head + ["ok", ""] + [repr(float(x) + 0.0) for x in (t, E, S, k, sr, er)])
    return path


def cmd_sweep(args) -> int:
    src = Path(args.scenario)
    raw = parse_text(src.read_text(), str(src))
    overrides = {k: str(v) for k, v in _overrides(args).items()}
    grid = parse_grid(args.grid)
    points = expand_grid(grid)
    keys = list(grid)
    # validate every point before spending compute on any of them
    scs: list[Scenario] = [build_scenario(raw, {**p, **overrides}) for p in points]
    out_dir = Path(overrides.get("out", scs[0].out))
    out_dir.mkdir(parents=True, exist_ok=True)
    stems = [s.stem for s in scs]
    if len(set(stems)) != len(stems):
        raise ScenarioError("grid points map to the same output stem; vary name, order or p0_multiple")
    jobs = [(i, raw, p, overrides, out_dir) for i, p in enumerate(points)]
    workers = max(1, int(os.environ.get(WORKERS_ENV, "1")))
    if workers == 1 or len(jobs) == 1:
        rows = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    rows.sort(key=lambda r: r["index"])
    name = scs[0].name
    path = write_sweep_csv(out_dir / f"{name}_sweep.csv", keys, rows)
    failed = [r for r in rows if r["status"] != "ok"]
    for r in rows:
        status = r["status"] if not r["error"] else f"{r['status']} ({r['error']})"
        print(f"point {r['index']}: {r['point']} {status}")
    print(f"wrote {path}")
    return 1 if failed else 0


ORACLES = ("radius", "frequencies", "headline", "ehrenfest", "epsilon", "all")


def cmd_oracle(args) -> int:
    from . import oracles as o

    which = args.which
    if which in ("radius", "all"):
        r = o.radius_mp(0.25e-15)
        print(f"radius(m = 0.25 pg, osmium)    = {float(r):.15e} m")
        print(f"radius(m = 100 ug, osmium)     = {float(o.radius_mp(1e-7)):.15e} m")
    if which in ("frequencies", "all"):
        r = float(o.radius_mp(0.25e-15))
        r1 = float(o.radius_mp(1e-15))
        w = o.omega_si(0.25e-15, 2.5 * r)
        w0 = o.HBAR / (2 * 0.25e-15 * (2.5e-9) ** 2)
        print(f"omega(0.25 pg, L = 2.5 R)      = {w:.15e} s^-1")
        print(f"omega0(0.25 pg, sigma = 2.5 nm) = {w0:.15e} s^-1   ratio {w0 / w:.6f}")
        print(f"omega(1 pg, L = 2.1 R)         = {o.omega_si(1e-15, 2.1 * r1):.15e} s^-1")
    if which in ("headline", "all"):
        r = float(o.radius_mp(0.25e-15))
        w = o.omega_si(0.25e-15, 2.5 * r)
        w0 = o.HBAR / (2 * 0.25e-15 * (2.5e-9) ** 2)
        print(f"E(t = 5 s, p0 = 0)             = {o.log_negativity_mp(w, w0, 1.0, 5.0):.15e}")
        print(f"S(t = 5 s, p0 = 0)             = {o.gaussian_entropy_mp(w, w0, 1.0, 5.0):.15e} bit")
    if which in ("ehrenfest", "all"):
        m, s = 1e-15, 1e-10
        w0 = o.HBAR / (2 * m * s * s)
        w = 0.04 * w0
        res = o.ehrenfest_relative(w, s, m, 0.0, 2e-8, 5.0 / w0)
        for k in ("mean_r", "mean_p", "var_r", "var_p", "cov_rp"):
            print(f"ehrenfest {k:7s} (omega = 0.04 omega0, t = 5/omega0) = {res[k]:.15e}")
    if which in ("epsilon", "all"):
        for n in range(3, 7):
            v = o.gaussian_moment_epsilon(n, mean=-1.0, sd=0.5, separation=10.0)
            print(f"eps_{n}(mean r = -1, sd = 0.5, L = 10) = {v:.15e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="centralent", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def flags(sp):
        sp.add_argument("--dt", type=float, help="time step in s")
        sp.add_argument("--grid-spacing", type=float, help="grid spacing in m")
        sp.add_argument("--order", type=int, help="expansion order N")
        sp.add_argument("--pipeline", choices=("analytic", "numeric", "both"))
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("run", help="run one scenario")
    sp.add_argument("scenario")
    flags(sp)
    sp.add_argument("--plot", action="store_true", help="also write a gnuplot command file")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help=f"run a parameter grid (workers from ${WORKERS_ENV})")
    sp.add_argument("scenario")
    sp.add_argument("grid")
    flags(sp)
    sp.add_argument("--plot", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="check a scenario and print it fully resolved")
    sp.add_argument("scenario")
    flags(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("oracle", help="print reference values from the independent oracles")
    sp.add_argument("which", choices=ORACLES)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    from .tdse import GridError, ResourceError, SolverError

    try:
        return args.func(args)
    except (ScenarioError, ConfigError, FileNotFoundError) as exc:
        print(f"centralent: error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, GridError, ResourceError) as exc:
        print(f"centralent: solver failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
