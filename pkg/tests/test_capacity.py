import math

import numpy as np
import pytest

from swipt_hpa.capacity import (
    InfeasibleEnergyFloor,
    MultiplierSearch,
    NotConverged,
    SolverOptions,
    _entropy_terms,
    _solve_fixed_multipliers,
    binary_optimum_closed_form,
    brute_force_capacity,
    extract_mass_points,
    solve_capacity,
    solve_lagrangian,
)
from swipt_hpa.channel import (
    SystemConfig,
    TransitionMatrix,
    build_transition_matrix,
    column_costs,
    column_energies,
    default_grid,
)
from swipt_hpa.specfun import binary_entropy, q_func

LOG2 = math.log(2.0)


def _dmc(probs, x_grid):
    probs = np.asarray(probs, float)
    return TransitionMatrix(
        probs=probs,
        x_grid=np.asarray(x_grid, float),
        y_grid=np.arange(probs.shape[0], dtype=float),
    )


def _slack_config(x_grid):
    return SystemConfig(
        h_i=1.0, h_e=1.0, b_rect=0.5, sigma2=1e6,
        a_peak=float(np.max(np.abs(x_grid))) + 1.0, hpa=None,
    )


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(max_iters=0)
    with pytest.raises(ValueError):
        SolverOptions(kkt_tol=0.0)
    with pytest.raises(ValueError):
        SolverOptions(merge_radius=-1.0)
    with pytest.raises(ValueError):
        MultiplierSearch(mu_max=0.0)


def test_bsc_capacity():
    eps = 0.11
    tm = _dmc([[1 - eps, eps], [eps, 1 - eps]], [-1.0, 1.0])
    sol = solve_capacity(tm, _slack_config(tm.x_grid))
    assert abs(sol.i_max - (1.0 - binary_entropy(eps))) < 1e-9
    assert np.max(np.abs(sol.p_star - 0.5)) < 1e-9
    assert sol.kkt_gap <= 1e-10
    assert sol.mu_power == 0.0 and sol.nu_energy == 0.0


def test_z_channel_capacity():
    q = 0.4
    tm = _dmc([[1.0, q], [0.0, 1 - q]], [0.25, 1.3])
    sol = solve_capacity(tm, _slack_config(tm.x_grid))
    analytic = math.log2(1.0 + (1 - q) * q ** (q / (1 - q)))
    assert abs(sol.i_max - analytic) < 1e-9
    assert sol.kkt_gap <= 1e-10


def test_solver_matches_brute_force():
    probs = np.array([
        [0.82, 0.05, 0.02],
        [0.10, 0.70, 0.08],
        [0.05, 0.15, 0.30],
        [0.03, 0.10, 0.60],
    ])
    tm = _dmc(probs, [0.2, 0.9, 2.1])
    sol = solve_capacity(tm, _slack_config(tm.x_grid))
    assert abs(sol.i_max - brute_force_capacity(tm, step=1e-3)) < 1e-5
    assert sol.kkt_gap <= 1e-10


def test_brute_force_guards():
    probs = np.full((2, 5), 0.2)
    tm = _dmc(probs, np.arange(5.0))
    with pytest.raises(ValueError):
        brute_force_capacity(tm)
    tm2 = _dmc(np.eye(4), np.arange(4.0))
    with pytest.raises(ValueError):
        brute_force_capacity(tm2, step=1e-4)


def test_power_budget_binds():
    cfg = SystemConfig(h_i=1.0, h_e=1.0, b_rect=0.5, sigma2=2.0, a_peak=3.0, hpa=None)
    tm = build_transition_matrix(default_grid(cfg, n_in=129, m_out=1001), cfg)
    sol = solve_capacity(tm, cfg)
    assert sol.power_at_opt <= 2.0 + 1e-6
    assert sol.mu_power > 0.0
    assert sol.kkt_gap <= 1e-5
    # the budget is genuinely active: it sits at the boundary
    assert sol.power_at_opt >= 2.0 - 1e-3


def test_energy_floor_trades_info(bpsk_config):
    cfg = SystemConfig(
        h_i=1.0, h_e=1.0, b_rect=0.5, sigma2=1000.0, a_peak=10.0,
        hpa=bpsk_config.hpa,
    )
    tm = build_transition_matrix(default_grid(cfg, n_in=129, m_out=1001), cfg)
    free = solve_capacity(tm, cfg)
    floor = free.e_at_opt + 0.3
    pinned = solve_capacity(tm, cfg, energy_floor=floor)
    assert pinned.e_at_opt >= floor - 1e-6
    assert pinned.i_max <= free.i_max + 1e-9
    assert pinned.nu_energy > 0.0
    assert pinned.kkt_gap <= 1e-5


def test_infeasible_floor_raises(bpsk_config):
    tm = build_transition_matrix(default_grid(bpsk_config), bpsk_config)
    with pytest.raises(InfeasibleEnergyFloor):
        solve_capacity(tm, bpsk_config, energy_floor=10.0)


def test_unreachable_tolerance_raises():
    probs = np.array([
        [0.82, 0.05, 0.02],
        [0.10, 0.70, 0.08],
        [0.05, 0.15, 0.30],
        [0.03, 0.10, 0.60],
    ])
    tm = _dmc(probs, [0.2, 0.9, 2.1])
    with pytest.raises(NotConverged):
        solve_capacity(tm, _slack_config(tm.x_grid), opts=SolverOptions(kkt_tol=1e-16))


def test_fixed_point_objective_ascends(bpsk_config):
    tm = build_transition_matrix(default_grid(bpsk_config), bpsk_config)
    probs = tm.probs
    entropy = _entropy_terms(probs)
    net = np.zeros(probs.shape[1])
    _, diag = _solve_fixed_multipliers(probs, entropy, net, SolverOptions())
    assert diag["iterations"] > 0
    for hist in diag["objective_history"]:
        arr = np.asarray(hist)
        if arr.size > 1:
            assert np.min(np.diff(arr)) > -1e-8


def test_energy_multiplier_monotone():
    cfg = SystemConfig(h_i=1.0, h_e=1.0, b_rect=0.5, sigma2=1e6, a_peak=3.0, hpa=None)
    tm = build_transition_matrix(default_grid(cfg, n_in=129, m_out=1001), cfg)
    cost = column_costs(tm.x_grid, cfg)
    energy = column_energies(tm.x_grid, cfg)
    es = []
    for nu in (0.0, 0.4, 0.8):
        p = solve_lagrangian(tm, cost, energy, mu=0.0, nu=nu)
        es.append(float(p @ energy))
    assert es[0] <= es[1] + 1e-9 <= es[2] + 2e-9


def test_power_multiplier_monotone():
    cfg = SystemConfig(h_i=1.0, h_e=1.0, b_rect=0.5, sigma2=1e6, a_peak=3.0, hpa=None)
    tm = build_transition_matrix(default_grid(cfg, n_in=129, m_out=1001), cfg)
    cost = column_costs(tm.x_grid, cfg)
    energy = column_energies(tm.x_grid, cfg)
    powers = []
    for mu in (0.0, 0.5, 2.0):
        p = solve_lagrangian(tm, cost, energy, mu=mu, nu=0.0)
        powers.append(float(p @ cost))
    assert powers[0] >= powers[1] - 1e-9 >= powers[2] - 2e-9


def test_extract_mass_points_merges_neighbors():
    x = np.linspace(-4.0, 4.0, 129)
    p = np.zeros(129)
    i = np.argmin(np.abs(x - 2.0))
    p[i], p[i + 1] = 0.3, 0.2
    j = np.argmin(np.abs(x + 2.0))
    p[j], p[j - 1] = 0.3, 0.2
    dist = extract_mass_points(p, x)
    assert len(dist.points) == 2
    # centroid of the split pair, mirrored exactly
    assert abs(dist.locations[1] + dist.locations[0]) < 1e-12
    assert np.allclose(dist.probs, 0.5, atol=1e-12)


def test_extract_mass_points_merge_radius_override():
    x = np.linspace(-4.0, 4.0, 129)
    p = np.zeros(129)
    p[10], p[118] = 0.5, 0.5  # mirror pair, survives symmetrization as-is
    wide = extract_mass_points(p, x, SolverOptions(merge_radius=10.0))
    assert len(wide.points) == 1
    narrow = extract_mass_points(p, x, SolverOptions(merge_radius=1e-6))
    assert len(narrow.points) == 2


def test_binary_closed_form_regimes(bpsk_config, wide_config):
    out = binary_optimum_closed_form(bpsk_config)
    assert out is not None
    i_max, e_min = out
    d = 1.6517521236405305
    assert abs(i_max - (1.0 - binary_entropy(q_func(d)))) < 1e-12
    assert e_min > 1.0
    # outside the small-amplitude regime there is no closed form
    assert binary_optimum_closed_form(wide_config) is None


def test_solution_record_fields(bpsk_config):
    from swipt_hpa.capacity import solution_record

    grid = default_grid(bpsk_config, n_in=65, m_out=501)
    tm = build_transition_matrix(grid, bpsk_config)
    sol = solve_capacity(tm, bpsk_config)
    rec = solution_record(sol, bpsk_config, grid)
    for key in ("i_max_bits", "e_at_opt", "power_at_opt", "kkt_gap_bits", "mass_points"):
        assert key in rec
