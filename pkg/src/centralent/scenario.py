"""Scenario files: a flat ``key = value`` format read into validated runs.

Grammar
-------
One assignment per line. ``#`` starts a comment anywhere on a line, blank
lines are ignored, keys are case-sensitive and may appear only once.
Physical quantities are SI (kg, m, s, kg m/s)::

    name            = fig3
    mass            = 0.25e-15        # kg
    separation_mode = radius_multiple # or: absolute
    radius_multiple = 2.5             # used with radius_multiple
    # separation    = 3.5e-7          # m, used with absolute
    density         = 22587.2         # kg m^-3, optional
    sigma           = 2.5e-9          # m
    p0_multiple     = 1.75            # of LEGEND_RATE; or p0_absolute in kg m/s
    order           = 3
    t_max           = 5
    cadence         = 0.25            # s between samples; or times = 0, 1, 2.5
    dt              = 2.5e-3          # s, optional
    grid_spacing    = 6.25e-11        # m, optional
    pipeline        = numeric         # analytic | numeric | both
    interaction     = gravity         # see potentials.interaction_from_spec
    out             = results/fig3

Sweep grids use the same grammar with comma-separated values; the grid is
the Cartesian product in file order.
"""
from __future__ import annotations

import itertools
from math import gcd
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .config import ConfigError, ExperimentConfig
from .tdse.solver import SolverSettings

__all__ = [
    "ScenarioError",
    "Scenario",
    "parse_text",
    "load_scenario",
    "build_scenario",
    "parse_grid",
    "expand_grid",
    "SCENARIO_KEYS",
]


class ScenarioError(ConfigError):
    """A scenario or grid file is malformed or describes an invalid run."""


_FLOAT = float


def _int(v: str) -> int:
    f = float(v)
    if f != int(f):
        raise ValueError(f"{v!r} is not an integer")
    return int(f)


def _bool(v: str) -> bool:
    low = v.lower()
    if low in ("1", "yes", "true", "on"):
        return True
    if low in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"{v!r} is not a boolean")


def _floats(v: str) -> tuple:
    return tuple(float(x) for x in v.split(",") if x.strip())


SCENARIO_KEYS: dict = {
    "name": str,
    "mass": _FLOAT,
    "separation_mode": str,
    "separation": _FLOAT,
    "radius_multiple": _FLOAT,
    "density": _FLOAT,
    "sigma": _FLOAT,
    "p0_multiple": _FLOAT,
    "p0_absolute": _FLOAT,
    "order": _int,
    "t_max": _FLOAT,
    "dt": _FLOAT,
    "grid_spacing": _FLOAT,
    "frame": str,
    "half_width_sd": _FLOAT,
    "cadence": _FLOAT,
    "times": _floats,
    "pipeline": str,
    "out": str,
    "plot": _bool,
    "deterministic": _bool,
    "cross_tolerance": _FLOAT,
    # interaction and its parameters
    "interaction": str,
    "q1": _FLOAT,
    "q2": _FLOAT,
    "casimir_radius": _FLOAT,
    "C": _FLOAT,
    "X": _FLOAT,
    "j": _FLOAT,
    "components": str,
}
_INTERACTION_KEYS = ("interaction", "q1", "q2", "casimir_radius", "C", "X", "j", "components")
PIPELINES = ("analytic", "numeric", "both")


def parse_text(text: str, source: str = "<scenario>", multi: bool = False) -> dict:
    """Raw ``key -> str`` mapping (``key -> list[str]`` when ``multi``)."""
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ScenarioError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in SCENARIO_KEYS:
            raise ScenarioError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ScenarioError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ScenarioError(f"{source}:{lineno}: empty value for {key!r}")
        if multi and key not in ("times", "components"):
            out[key] = [v.strip() for v in value.split(",") if v.strip()]
        else:
            out[key] = value
    return out


def _typed(raw: Mapping[str, str]) -> dict:
    typed = {}
    for k, v in raw.items():
        if k not in SCENARIO_KEYS:
            raise ScenarioError(f"unknown key {k!r}")
        try:
            typed[k] = SCENARIO_KEYS[k](str(v))
        except ValueError as exc:
            raise ScenarioError(f"bad value for {k!r}: {exc}") from None
    return typed


@dataclass(frozen=True)
class Scenario:
    """A fully resolved run: physics, numerics and outputs."""

    name: str
    cfg: ExperimentConfig
    interaction: dict
    pipeline: str
    settings: SolverSettings
    sample_times: tuple
    out: Path
    plot: bool = False
    deterministic: bool = True
    cross_tolerance: float = 1e-3
    raw: dict = field(default_factory=dict)

    @property
    def stem(self) -> str:
        """File stem carrying order and legend multiple, e.g. ``fig4_N3_p0+1.75``."""
        return f"{self.name}_N{self.cfg.order}_p0{self.cfg.p0_multiple:+.2f}"

    def resolved(self) -> dict:
        """Every key with the value actually used, defaults included."""
        r = dict(self.raw)
        r.update(
            name=self.name,
            order=self.cfg.order,
            t_max=self.cfg.t_max,
            dt=self.settings.dt,
            frame=self.settings.frame,
            half_width_sd=self.settings.half_width_sd,
            pipeline=self.pipeline,
            out=str(self.out),
            plot=self.plot,
            cross_tolerance=self.cross_tolerance,
        )
        r.pop("cadence", None)
        r["times"] = tuple(self.sample_times)
        r.setdefault("interaction", "gravity")
        return {k: r[k] for k in SCENARIO_KEYS if k in r}

    def to_text(self) -> str:
        """A scenario file that reproduces this run."""
        lines = []
        for k, v in self.resolved().items():
            if isinstance(v, tuple):
                v = ", ".join(repr(float(x)) for x in v)
            elif isinstance(v, bool):
                v = "yes" if v else "no"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def _default_step(cfg: ExperimentConfig, cadence: float) -> float:
    # 1e-4 radians of the fastest free phase per step, rounded so that the
    # cadence is an exact multiple
    rate = max(cfg.omega0, cfg.omega)
    if cadence <= 0:
        return 1e-4 / rate
    return cadence / max(1, int(np.ceil(cadence * rate / 1e-4)))


def _common_step(times) -> float:
    """Largest step (to microsecond resolution) dividing every sample time."""
    g = 0
    for t in times:
        g = gcd(g, int(round(t * 1e6)))
    return g * 1e-6


def build_scenario(raw: Mapping[str, str], overrides: Mapping[str, str] | None = None) -> Scenario:
    """Validate raw keys (plus CLI overrides) into a :class:`Scenario`."""
    merged = dict(raw)
    merged.update({k: str(v) for k, v in (overrides or {}).items() if v is not None})
    v = _typed(merged)

    for req in ("mass", "sigma"):
        if req not in v:
            raise ScenarioError(f"missing required key {req!r}")
    mode = v.get("separation_mode", "absolute")
    kw: dict = {}
    if mode == "absolute":
        if "separation" not in v:
            raise ScenarioError("separation_mode = absolute needs 'separation'")
        if "radius_multiple" in v:
            raise ScenarioError("'radius_multiple' given with separation_mode = absolute")
        kw["separation_m"] = v["separation"]
    elif mode == "radius_multiple":
        if "radius_multiple" not in v:
            raise ScenarioError("separation_mode = radius_multiple needs 'radius_multiple'")
        if "separation" in v:
            raise ScenarioError("'separation' given with separation_mode = radius_multiple")
        kw["radius_multiple"] = v["radius_multiple"]
    else:
        raise ScenarioError(f"separation_mode must be absolute or radius_multiple, not {mode!r}")
    if "density" in v:
        kw["rho"] = v["density"]
    if "p0_multiple" in v and "p0_absolute" in v:
        raise ScenarioError("give p0_multiple or p0_absolute, not both")
    if "p0_multiple" in v:
        kw["p0_multiple"] = v["p0_multiple"]
    elif "p0_absolute" in v:
        kw["p0_si"] = v["p0_absolute"]
    try:
        cfg = ExperimentConfig.from_si(
            v["mass"], v["sigma"], t_max=v.get("t_max", 5.0), order=v.get("order", 2), **kw
        )
    except ConfigError as exc:
        raise ScenarioError(str(exc)) from None

    pipeline = v.get("pipeline", "numeric")
    if pipeline not in PIPELINES:
        raise ScenarioError(f"pipeline must be one of {PIPELINES}, not {pipeline!r}")
    if pipeline != "numeric" and cfg.order != 2:
        # "both" would cross-check an exact numeric run against a quadratic-only answer
        raise ScenarioError(f"the analytic pipeline is exact only at order 2; use numeric for order {cfg.order}")

    if "times" in v and "cadence" in v:
        raise ScenarioError("give cadence or times, not both")
    if "times" in v:
        times = tuple(sorted(set(v["times"])))
        if any(t < 0 or t > cfg.t_max for t in times):
            raise ScenarioError("sample times must lie in [0, t_max]")
        base = _common_step(times)
    else:
        cadence = v.get("cadence", cfg.t_max / 20 if cfg.t_max > 0 else 0.0)
        if cadence < 0:
            raise ScenarioError("cadence must be non-negative")
        n = int(round(cfg.t_max / cadence)) if cadence > 0 else 0
        if cadence > 0 and abs(n * cadence - cfg.t_max) > 1e-9 * cfg.t_max:
            raise ScenarioError("t_max must be a whole number of cadence intervals")
        times = tuple(i * cadence for i in range(n + 1)) if cfg.t_max > 0 else (0.0,)
        base = cadence

    dt = v["dt"] if "dt" in v else _default_step(cfg, base)
    if dt <= 0:
        raise ScenarioError("dt must be positive")
    for t in times:
        q = t / dt
        if abs(q - round(q)) > 1e-6 * max(1.0, q):
            raise ScenarioError(f"sample time {t!r} s is not a multiple of dt = {dt!r} s")
    spacing_m = v["grid_spacing"] if "grid_spacing" in v else v["sigma"] / 40.0
    spacing = spacing_m * 1e12
    try:
        settings = SolverSettings(
            dt=dt, spacing=spacing, frame=v.get("frame", "comoving"), half_width_sd=v.get("half_width_sd", 10.0)
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None

    interaction = {k: merged[k] for k in _INTERACTION_KEYS if k in merged}
    interaction.setdefault("interaction", "gravity")
    if pipeline != "numeric":
        from .potentials import interaction_from_spec

        if interaction_from_spec(interaction, cfg).omega_sq <= 0:
            raise ScenarioError("the analytic pipeline needs an attractive quadratic term")

    name = v.get("name", "run")
    if any(c in name for c in "/\\ "):
        raise ScenarioError("name must not contain spaces or path separators")
    raw_typed = {k: val for k, val in v.items() if k != "dt"}
    raw_typed["grid_spacing"] = spacing_m
    return Scenario(
        name=name,
        cfg=cfg,
        interaction=interaction,
        pipeline=pipeline,
        settings=settings,
        sample_times=times,
        out=Path(v.get("out", "centralent-out")),
        plot=v.get("plot", False),
        deterministic=v.get("deterministic", True),
        cross_tolerance=v.get("cross_tolerance", 1e-3),
        raw=raw_typed,
    )


def load_scenario(path: str | Path, overrides: Mapping[str, str] | None = None) -> Scenario:
    path = Path(path)
    return build_scenario(parse_text(path.read_text(), str(path)), overrides)


def parse_grid(path_or_text: str | Path) -> dict:
    """Grid file into ``key -> list of raw values``."""
    p = Path(path_or_text)
    text = p.read_text() if p.exists() else str(path_or_text)
    grid = parse_text(text, str(p) if p.exists() else "<grid>", multi=True)
    if not grid:
        raise ScenarioError("empty parameter grid")
    return {k: (v if isinstance(v, list) else [v]) for k, v in grid.items()}


def expand_grid(grid: Mapping[str, Iterable[str]]) -> list[dict]:
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(list(grid[k]) for k in keys))]
