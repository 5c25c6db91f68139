"""Information-energy region boundary tracing.

The boundary runs from the capacity anchor (i_max, e_min) to the energy
anchor (i_min, e_max); interior points come from capacity solves with the
harvested-energy floor swept uniformly between the anchor energies.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .capacity import (
    CapacitySolution,
    SolverOptions,
    grid_energy_max,
    solve_capacity,
)
from .channel import (
    GridSpec,
    SystemConfig,
    build_transition_matrix,
    column_costs,
    default_grid,
    mutual_information,
)
from .energy_max import P1Solution, solve_p1

# info may exceed an earlier point's by at most this before it is treated
# as solver noise during Pareto cleaning
PARETO_WINDOW = 1e-9
DEGENERATE_TOL = 1e-4


@dataclass(frozen=True)
class RatePoint:
    info: float
    energy: float

    def __post_init__(self):
        if self.info < -1e-9 or self.energy < 1.0 - 1e-9:
            raise ValueError(f"invalid rate point ({self.info}, {self.energy})")
        object.__setattr__(self, "info", max(0.0, float(self.info)))
        object.__setattr__(self, "energy", max(1.0, float(self.energy)))


@dataclass(frozen=True)
class RegionBoundary:
    """Pareto-cleaned boundary points ordered by increasing energy."""

    points: tuple[RatePoint, ...]
    endpoints: tuple[RatePoint, RatePoint]  # (i_max, e_min), (i_min, e_max)
    degenerate: bool
    details: tuple[dict, ...]  # per-point: floor, kkt_gap, mass points, ...
    meta: dict


def _capacity_detail(sol: CapacitySolution, floor: float | None) -> dict:
    return {
        "source": "capacity",
        "floor": floor,
        "n_mass_points": len(sol.mass_points.points),
        "kkt_gap": sol.kkt_gap,
        "power": sol.power_at_opt,
        "energy": sol.e_at_opt,
        "mu_power": sol.mu_power,
        "nu_energy": sol.nu_energy,
        "mass_points": [list(p) for p in sol.mass_points.points],
    }


def _p1_detail(p1: P1Solution, config: SystemConfig) -> dict:
    power = float(p1.dist.probs @ column_costs(p1.dist.locations, config))
    return {
        "source": "energy_max",
        "floor": None,
        "n_mass_points": len(p1.dist.points),
        "kkt_gap": 0.0,  # closed form, no iterative residual
        "power": power,
        "energy": p1.e_max,
        "case_tag": p1.case_tag,
        "mass_points": [list(p) for p in p1.dist.points],
    }


def _pareto_clean(entries):
    """Keep the non-dominated staircase: energies strictly increasing,
    info non-increasing up to the noise window.  Entries are (RatePoint,
    detail) pairs; a point beaten in both coordinates is dropped."""
    entries = sorted(entries, key=lambda t: (t[0].energy, -t[0].info))
    kept: list = []
    for pt, det in entries:
        while kept and pt.info > kept[-1][0].info + PARETO_WINDOW:
            kept.pop()  # earlier point is dominated (less energy, less info)
        if kept and pt.energy - kept[-1][0].energy <= 1e-12 * max(1.0, pt.energy):
            continue  # duplicate energy level; the kept one has >= info
        kept.append((pt, det))
    return kept


def trace_boundary(
    config: SystemConfig,
    grid: GridSpec | None = None,
    n_points: int = 9,
    opts: SolverOptions | None = None,
) -> RegionBoundary:
    """Trace the region boundary with n_points target samples.

    Anchors are always included: the floor-free capacity solve and the
    closed-form energy maximum.  The n_points - 2 interior energy floors
    are uniform between the anchor energies, capped at the largest energy
    expressible on the grid.
    """
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    opts = opts or SolverOptions()
    if grid is None:
        grid = default_grid(config)
    tm = build_transition_matrix(grid, config)

    cap = solve_capacity(tm, config, None, opts)
    p1 = solve_p1(config)
    i_min_val = mutual_information(p1.dist, config)
    anchor_hi = RatePoint(info=cap.i_max, energy=cap.e_at_opt)
    anchor_lo = RatePoint(info=i_min_val, energy=p1.e_max)
    degenerate = (p1.e_max - cap.e_at_opt) <= DEGENERATE_TOL

    entries = [(anchor_hi, _capacity_detail(cap, None))]
    if not degenerate and n_points > 2:
        floors = np.linspace(cap.e_at_opt, p1.e_max, n_points)[1:-1]
        e_cap = grid_energy_max(tm, config)
        margin = 1e-9 * max(1.0, p1.e_max - cap.e_at_opt)
        floors = np.minimum(floors, e_cap - margin)
        for floor in floors:
            if floor <= cap.e_at_opt:
                continue
            sol = solve_capacity(tm, config, float(floor), opts)
            entries.append(
                (
                    RatePoint(info=sol.i_max, energy=sol.e_at_opt),
                    _capacity_detail(sol, float(floor)),
                )
            )
    entries.append((anchor_lo, _p1_detail(p1, config)))

    kept = _pareto_clean(entries)
    meta = {
        "variant": (
            "no_hpa"
            if config.hpa is None
            else ("predistorted" if config.predistortion else "hpa")
        ),
        "config": {
            "h_i": config.h_i,
            "h_e": config.h_e,
            "b_rect": config.b_rect,
            "sigma2": config.sigma2,
            "a_peak": config.a_peak,
            "hpa": None
            if config.hpa is None
            else {"a_s": config.hpa.a_s, "beta": config.hpa.beta},
            "predistortion": config.predistortion,
        },
        "grid": {"n_in": grid.n_in, "m_out": grid.m_out, "gamma": grid.gamma},
        "solver": {
            "max_iters": opts.max_iters,
            "mi_tol": opts.mi_tol,
            "kkt_tol": opts.kkt_tol,
            "support_threshold": opts.support_threshold,
            "merge_radius": opts.merge_radius,
        },
        "n_points_requested": n_points,
        "degenerate_region": degenerate,
    }
    return RegionBoundary(
        points=tuple(pt for pt, _ in kept),
        endpoints=(anchor_hi, anchor_lo),
        degenerate=degenerate,
        details=tuple(det for _, det in kept),
        meta=meta,
    )


def trace_boundary_no_hpa(
    config: SystemConfig,
    grid: GridSpec | None = None,
    n_points: int = 9,
    opts: SolverOptions | None = None,
) -> RegionBoundary:
    """Benchmark boundary with a distortionless amplifier (output = input)."""
    bench = dataclasses.replace(config, hpa=None, predistortion=False)
    return trace_boundary(bench, grid, n_points, opts)


def trace_boundary_predistorted(
    config: SystemConfig,
    grid: GridSpec | None = None,
    n_points: int = 9,
    opts: SolverOptions | None = None,
) -> RegionBoundary:
    """Boundary with the inverse-map predistorter ahead of the amplifier.

    Average power is then consumed by the predistorted symbol q(x) while
    the peak constraint stays on x itself.
    """
    if config.hpa is None:
        raise ValueError("predistorted trace requires an amplifier model")
    pd = dataclasses.replace(config, predistortion=True)
    return trace_boundary(pd, grid, n_points, opts)


def info_at_energy(boundary: RegionBoundary, energy) -> float | np.ndarray:
    """Boundary info at the queried energy levels, linearly interpolated.

    Below the first traced energy the boundary is flat at i_max (the
    energy constraint is slack there); the frontier is concave in energy,
    so interpolation never overstates it.  Queries above the last traced
    energy clamp to the final info value.
    """
    es = np.array([p.energy for p in boundary.points])
    infos = np.array([p.info for p in boundary.points])
    out = np.interp(energy, es, infos)
    return float(out) if np.ndim(energy) == 0 else out


def write_boundary_csv(boundary: RegionBoundary, path) -> None:
    lines = ["energy_metric,info_bits,n_mass_points,kkt_gap"]
    for pt, det in zip(boundary.points, boundary.details):
        lines.append(
            f"{pt.energy:.12g},{pt.info:.12g},"
            f"{det['n_mass_points']},{det['kkt_gap']:.12g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def boundary_record(boundary: RegionBoundary) -> dict:
    """JSON-ready sidecar with full per-point distributions."""
    return {
        "meta": boundary.meta,
        "degenerate_region": boundary.degenerate,
        "endpoints": {
            "capacity": {
                "info_bits": boundary.endpoints[0].info,
                "energy_metric": boundary.endpoints[0].energy,
            },
            "energy_max": {
                "info_bits": boundary.endpoints[1].info,
                "energy_metric": boundary.endpoints[1].energy,
            },
        },
        "points": [
            {"energy_metric": pt.energy, "info_bits": pt.info, **det}
            for pt, det in zip(boundary.points, boundary.details)
        ],
    }


def write_boundary_json(boundary: RegionBoundary, path) -> None:
    Path(path).write_text(json.dumps(boundary_record(boundary), indent=2) + "\n")
