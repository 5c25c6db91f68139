"""Capacity-achieving discrete inputs and information-energy regions for a
real AWGN link with an SSPA amplifier front end."""

__version__ = "0.1.0"

from .capacity import (
    CapacitySolution,
    InfeasibleEnergyFloor,
    MultiplierSearch,
    NotConverged,
    SolverOptions,
    binary_optimum_closed_form,
    brute_force_capacity,
    extract_mass_points,
    solve_capacity,
)
from .channel import (
    GridSpec,
    MassDistribution,
    SystemConfig,
    TransitionMatrix,
    build_transition_matrix,
    conditional_pdf,
    default_grid,
    effective_output,
    energy_metric,
    mi_from_matrix,
    mutual_information,
)
from .energy_max import (
    ClassificationAmbiguous,
    P1Solution,
    brute_force_p1,
    classify_g,
    g_func,
    i_min,
    solve_p1,
)
from .hpa import HpaParams, amam, predistort, saturation_input
from .region import (
    RatePoint,
    RegionBoundary,
    info_at_energy,
    trace_boundary,
    trace_boundary_no_hpa,
    trace_boundary_predistorted,
    write_boundary_csv,
    write_boundary_json,
)
from .specfun import bessel_i0, binary_entropy, log_bessel_i0, q_func

__all__ = [
    "CapacitySolution",
    "ClassificationAmbiguous",
    "GridSpec",
    "HpaParams",
    "InfeasibleEnergyFloor",
    "MassDistribution",
    "MultiplierSearch",
    "NotConverged",
    "P1Solution",
    "RatePoint",
    "RegionBoundary",
    "SolverOptions",
    "SystemConfig",
    "TransitionMatrix",
    "amam",
    "bessel_i0",
    "binary_entropy",
    "binary_optimum_closed_form",
    "brute_force_capacity",
    "brute_force_p1",
    "build_transition_matrix",
    "classify_g",
    "conditional_pdf",
    "default_grid",
    "effective_output",
    "energy_metric",
    "extract_mass_points",
    "g_func",
    "i_min",
    "info_at_energy",
    "log_bessel_i0",
    "mi_from_matrix",
    "mutual_information",
    "predistort",
    "q_func",
    "saturation_input",
    "solve_capacity",
    "solve_p1",
    "trace_boundary",
    "trace_boundary_no_hpa",
    "trace_boundary_predistorted",
    "write_boundary_csv",
    "write_boundary_json",
]
