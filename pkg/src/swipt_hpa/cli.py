"""Command-line front end: named desk-scale scenarios emitting CSV/JSON.

Configuration is resolved as defaults <- config file <- flags; every run
writes a manifest sufficient to reproduce each number in the CSVs.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .capacity import (
    InfeasibleEnergyFloor,
    NotConverged,
    SolverOptions,
    solution_record,
    solve_capacity,
)
from .channel import GridSpec, SystemConfig, build_transition_matrix, default_grid
from .energy_max import ClassificationAmbiguous, g_curve_table, solve_p1
from .hpa import HpaParams
from .region import (
    trace_boundary,
    trace_boundary_no_hpa,
    trace_boundary_predistorted,
    write_boundary_csv,
    write_boundary_json,
)

OUTDIR_ENV = "SWIPT_HPA_OUTDIR"

_SYSTEM_KEYS = {"h_i", "h_e", "b_rect", "sigma2", "a_peak", "hpa"}
_GRID_KEYS = {"n_in", "m_out", "gamma"}
_SOLVER_KEYS = {"max_iters", "mi_tol", "kkt_tol", "support_threshold", "merge_radius"}
_TOP_KEYS = {"scenario", "out_dir", "n_points", "seed", "grid", "solver", "system"}


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str
    out_dir: Path
    n_points: int = 9
    seed: int = 0
    grid: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    system: dict = field(default_factory=dict)


def _as_float(name: str, v) -> float:
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {v!r}") from None


def _as_int(name: str, v) -> int:
    if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    try:
        return int(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {v!r}") from None


def parse_sigma2(v) -> float:
    """Average-power budget, linear or with an explicit dB suffix
    (e.g. '30dB' -> 1000)."""
    if isinstance(v, str):
        s = v.strip().lower().replace(" ", "")
        if s.endswith("db"):
            return 10.0 ** (_as_float("sigma2", s[:-2]) / 10.0)
        return _as_float("sigma2", s)
    return _as_float("sigma2", v)


def _check_keys(section: str, given: dict, allowed: set) -> None:
    unknown = set(given) - allowed
    if unknown:
        raise ConfigError(
            f"unknown {section} keys {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping, got {type(data).__name__}")
    _check_keys("top-level", data, _TOP_KEYS)
    return data


def _validate_system(system: dict) -> dict:
    _check_keys("system", system, _SYSTEM_KEYS)
    out = {}
    for k, v in system.items():
        if k == "sigma2":
            out[k] = parse_sigma2(v)
            if out[k] <= 0:
                raise ConfigError("sigma2 must be positive")
        elif k == "hpa":
            if v is None:
                out[k] = None
            elif isinstance(v, dict):
                _check_keys("hpa", v, {"a_s", "beta"})
                out[k] = {kk: _as_float(f"hpa.{kk}", vv) for kk, vv in v.items()}
            else:
                raise ConfigError("hpa must be a mapping or null")
        else:
            out[k] = _as_float(f"system.{k}", v)
    return out


def _validate_grid(grid: dict) -> dict:
    _check_keys("grid", grid, _GRID_KEYS)
    out = {}
    for k, v in grid.items():
        if k == "gamma":
            out[k] = None if v is None else _as_float("grid.gamma", v)
        else:
            out[k] = _as_int(f"grid.{k}", v)
            if out[k] < 2:
                raise ConfigError(f"grid.{k} must be at least 2")
    return out


def _validate_solver(solver: dict) -> dict:
    _check_keys("solver", solver, _SOLVER_KEYS)
    out = {}
    for k, v in solver.items():
        if k == "max_iters":
            out[k] = _as_int("solver.max_iters", v)
        elif k == "merge_radius":
            out[k] = None if v is None else _as_float("solver.merge_radius", v)
        else:
            out[k] = _as_float(f"solver.{k}", v)
    return out


# representative base per scenario, used to range-check system overrides
# against SystemConfig invariants at resolve time
_VALIDATION_BASES = {
    "fig1": {"h_i": 1.0, "h_e": 1.0, "b_rect": 0.1, "sigma2": 49.0,
             "a_peak": 16.0, "hpa": {"a_s": 10.0, "beta": 1.0}},
    "fig2": {"h_i": 1.0, "h_e": 1.0, "b_rect": 0.5, "sigma2": 1000.0,
             "a_peak": 18.0, "hpa": {"a_s": 5.0, "beta": 1.0}},
    "fig3": {"h_i": 1.0, "h_e": 1.0, "b_rect": 0.5, "sigma2": 1000.0,
             "a_peak": 10.0, "hpa": {"a_s": 5.0, "beta": 1.0}},
    "fig4": {"h_i": 1.0, "h_e": 1.0, "b_rect": 0.5, "sigma2": 1000.0,
             "a_peak": 6.0, "hpa": {"a_s": 5.0, "beta": 1.0}},
}


def _resolve(args, scenario_from_cli: str | None) -> ScenarioConfig:
    data = _load_config_file(args.config) if args.config else {}
    scenario = scenario_from_cli or data.get("scenario")
    if scenario is None:
        raise ConfigError("no scenario given (positional argument or config key)")
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {scenario!r}; available: {sorted(SCENARIOS)}"
        )
    out_dir = (
        getattr(args, "out", None)
        or data.get("out_dir")
        or os.environ.get(OUTDIR_ENV)
        or "swipt-hpa-out"
    )
    n_points = data.get("n_points", 9)
    if getattr(args, "points", None) is not None:
        n_points = args.points
    n_points = _as_int("n_points", n_points)
    if n_points < 2:
        raise ConfigError("n_points must be at least 2")
    seed = _as_int("seed", data.get("seed", 0))
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    grid = _validate_grid(dict(data.get("grid") or {}))
    if getattr(args, "grid_nin", None) is not None:
        grid["n_in"] = _as_int("--grid-nin", args.grid_nin)
        if grid["n_in"] < 2:
            raise ConfigError("--grid-nin must be at least 2")
    solver = _validate_solver(dict(data.get("solver") or {}))
    system = _validate_system(dict(data.get("system") or {}))
    # construct once to surface invalid values before any compute
    _solver_options(solver)
    _make_system(_VALIDATION_BASES[scenario], system)
    return ScenarioConfig(
        scenario=scenario,
        out_dir=Path(out_dir),
        n_points=n_points,
        seed=seed,
        grid=grid,
        solver=solver,
        system=system,
    )


def _solver_options(overrides: dict) -> SolverOptions:
    try:
        return SolverOptions(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver options: {exc}") from None


def _make_system(base: dict, overrides: dict) -> SystemConfig:
    merged = dict(base)
    for k, v in overrides.items():
        if k == "hpa" and isinstance(v, dict) and isinstance(merged.get("hpa"), dict):
            merged["hpa"] = {**merged["hpa"], **v}
        else:
            merged[k] = v
    hpa = merged.get("hpa")
    try:
        return SystemConfig(
            h_i=float(merged["h_i"]),
            h_e=float(merged["h_e"]),
            b_rect=float(merged["b_rect"]),
            sigma2=float(merged["sigma2"]),
            a_peak=float(merged["a_peak"]),
            hpa=None if hpa is None else HpaParams(a_s=hpa["a_s"], beta=hpa["beta"]),
            predistortion=bool(merged.get("predistortion", False)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _grid_for(config: SystemConfig, overrides: dict) -> GridSpec:
    spec = default_grid(
        config,
        n_in=overrides.get("n_in", 257),
        m_out=overrides.get("m_out", 2001),
    )
    if overrides.get("gamma") is not None:
        spec = GridSpec(n_in=spec.n_in, m_out=spec.m_out, gamma=overrides["gamma"])
    return spec


class _Writer:
    """Tracks files written into the output directory so a failed run can
    remove its partial artifacts."""

    def __init__(self, outdir: Path):
        self.outdir = outdir
        self.files: list[str] = []

    def register(self, name: str) -> Path:
        self.files.append(name)
        return self.outdir / name

    def csv(self, name: str, header: str, rows) -> None:
        lines = [header]
        for row in rows:
            lines.append(",".join(f"{v:.12g}" for v in row))
        self.register(name).write_text("\n".join(lines) + "\n")

    def json(self, name: str, payload: dict) -> None:
        self.register(name).write_text(json.dumps(payload, indent=2) + "\n")

    def cleanup(self) -> None:
        for name in self.files:
            try:
                (self.outdir / name).unlink(missing_ok=True)
            except OSError:
                pass


def _run_fig1(scfg: ScenarioConfig, w: _Writer) -> list[dict]:
    base = {"h_i": 1.0, "h_e": 1.0, "b_rect": 0.1, "sigma2": 49.0, "a_peak": 16.0}
    variants = [
        ("as10_beta1", {"a_s": 10.0, "beta": 1.0}),
        ("as10_beta80", {"a_s": 10.0, "beta": 80.0}),
        ("as100_beta10", {"a_s": 100.0, "beta": 10.0}),
    ]
    records = []
    for tag, hpa in variants:
        config = _make_system({**base, "hpa": hpa}, scfg.system)
        sol = solve_p1(config)
        w.csv(f"p1_dist_{tag}.csv", "location,probability", sol.dist.points)
        w.csv(f"g_curve_{tag}.csv", "x,g", g_curve_table(config, 0.25, config.a_peak))
        records.append(
            {
                "curve": tag,
                "case_tag": sol.case_tag,
                "e_max": sol.e_max,
                "lam": sol.lam,
                "p_active": sol.p_active,
            }
        )
    return records


def _run_fig2(scfg: ScenarioConfig, w: _Writer) -> list[dict]:
    base = {
        "h_i": 1.0,
        "h_e": 1.0,
        "b_rect": 0.5,
        "sigma2": 1000.0,
        "hpa": {"a_s": 5.0, "beta": 1.0},
    }
    opts = _solver_options(scfg.solver)
    records = []
    for tag, a_peak in [("A18", 18.0), ("A1p75", 1.75)]:
        config = _make_system({**base, "a_peak": a_peak}, scfg.system)
        grid = _grid_for(config, scfg.grid)
        tm = build_transition_matrix(grid, config)
        sol = solve_capacity(tm, config, None, opts)
        w.csv(f"capacity_dist_{tag}.csv", "location,probability", sol.mass_points.points)
        w.json(f"solution_{tag}.json", solution_record(sol, config, grid))
        records.append(
            {
                "curve": tag,
                "i_max_bits": sol.i_max,
                "e_at_opt": sol.e_at_opt,
                "kkt_gap_bits": sol.kkt_gap,
                "n_mass_points": len(sol.mass_points.points),
            }
        )
    return records


def _boundary_curve(tag, tracer, config, grid, scfg, opts, w) -> dict:
    boundary = tracer(config, grid, scfg.n_points, opts)
    write_boundary_csv(boundary, w.register(f"boundary_{tag}.csv"))
    write_boundary_json(boundary, w.register(f"boundary_{tag}.json"))
    return {
        "curve": tag,
        "variant": boundary.meta["variant"],
        "degenerate_region": boundary.degenerate,
        "i_max_bits": boundary.endpoints[0].info,
        "e_min": boundary.endpoints[0].energy,
        "i_min_bits": boundary.endpoints[1].info,
        "e_max": boundary.endpoints[1].energy,
        "n_points": len(boundary.points),
    }


def _run_fig3(scfg: ScenarioConfig, w: _Writer) -> list[dict]:
    base = {
        "h_i": 1.0,
        "h_e": 1.0,
        "b_rect": 0.5,
        "sigma2": 1000.0,
        "hpa": {"a_s": 5.0, "beta": 1.0},
    }
    opts = _solver_options(scfg.solver)
    records = []
    for tag, a_peak, variant in [
        ("A1p75", 1.75, "hpa"),
        ("A5", 5.0, "hpa"),
        ("A10", 10.0, "hpa"),
        ("A10_no_hpa", 10.0, "no_hpa"),
    ]:
        config = _make_system({**base, "a_peak": a_peak}, scfg.system)
        if variant == "no_hpa":
            bench = dataclasses.replace(config, hpa=None, predistortion=False)
            grid = _grid_for(bench, scfg.grid)
            records.append(
                _boundary_curve(tag, trace_boundary_no_hpa, config, grid, scfg, opts, w)
            )
        else:
            grid = _grid_for(config, scfg.grid)
            records.append(
                _boundary_curve(tag, trace_boundary, config, grid, scfg, opts, w)
            )
    return records


def _run_fig4(scfg: ScenarioConfig, w: _Writer) -> list[dict]:
    base = {
        "h_i": 1.0,
        "h_e": 1.0,
        "b_rect": 0.5,
        "sigma2": 1000.0,
        "a_peak": 6.0,
        "hpa": {"a_s": 5.0, "beta": 1.0},
    }
    opts = _solver_options(scfg.solver)
    records = []
    for beta in (1.0, 2.0, 10.0):
        config = _make_system(
            {**base, "hpa": {"a_s": 5.0, "beta": beta}}, scfg.system
        )
        btag = f"beta{beta:g}"
        grid = _grid_for(config, scfg.grid)
        records.append(
            _boundary_curve(f"{btag}_plain", trace_boundary, config, grid, scfg, opts, w)
        )
        pd_conf = dataclasses.replace(config, predistortion=True)
        grid_pd = _grid_for(pd_conf, scfg.grid)
        records.append(
            _boundary_curve(
                f"{btag}_pd", trace_boundary_predistorted, config, grid_pd, scfg, opts, w
            )
        )
    return records


SCENARIOS = {
    "fig1": _run_fig1,
    "fig2": _run_fig2,
    "fig3": _run_fig3,
    "fig4": _run_fig4,
}


def _resolved_dict(scfg: ScenarioConfig) -> dict:
    return {
        "scenario": scfg.scenario,
        "out_dir": str(scfg.out_dir),
        "n_points": scfg.n_points,
        "seed": scfg.seed,
        "grid": scfg.grid,
        "solver": dataclasses.asdict(_solver_options(scfg.solver)),
        "system": scfg.system,
    }


def _cmd_run(args) -> int:
    try:
        scfg = _resolve(args, args.scenario)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    resolved = _resolved_dict(scfg)
    if args.print_config:
        print(yaml.safe_dump(resolved, sort_keys=True), end="")
    scfg.out_dir.mkdir(parents=True, exist_ok=True)
    w = _Writer(scfg.out_dir)
    t0 = time.monotonic()
    try:
        records = SCENARIOS[scfg.scenario](scfg, w)
    except ConfigError as exc:
        w.cleanup()
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NotConverged, InfeasibleEnergyFloor, ClassificationAmbiguous) as exc:
        w.cleanup()
        print(f"solver failure in scenario {scfg.scenario!r}: {exc}", file=sys.stderr)
        return 2
    manifest = {
        "scenario": scfg.scenario,
        "version": __version__,
        "config_hash": hashlib.sha256(
            json.dumps(resolved, sort_keys=True).encode()
        ).hexdigest()[:16],
        "resolved_config": resolved,
        "wall_clock_seconds": round(time.monotonic() - t0, 3),
        "curves": records,
        "files": list(w.files),
    }
    (scfg.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for name in w.files + ["manifest.json"]:
        print(scfg.out_dir / name)
    return 0


def _cmd_validate(args) -> int:
    try:
        scfg = _resolve(args, None)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    print(yaml.safe_dump(_resolved_dict(scfg), sort_keys=True), end="")
    print("ok")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="swipt-hpa",
        description=(
            "Capacity-achieving input distributions and information-energy "
            "region boundaries for an AWGN link with an SSPA front end"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a named scenario")
    run_p.add_argument(
        "scenario",
        nargs="?",
        default=None,
        help=f"one of {sorted(SCENARIOS)}; may also come from the config file",
    )
    run_p.add_argument("--config", help="YAML config file")
    run_p.add_argument("--out", help=f"output directory (default ${OUTDIR_ENV})")
    run_p.add_argument("--points", type=int, help="boundary samples per curve")
    run_p.add_argument("--grid-nin", type=int, help="input grid size override")
    run_p.add_argument("--seed", type=int, help="seed recorded for audit runs")
    run_p.add_argument(
        "--print-config", action="store_true", help="dump the resolved configuration"
    )
    val_p = sub.add_parser("validate", help="check a config file without running")
    val_p.add_argument("--config", required=True)
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
