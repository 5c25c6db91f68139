"""Closed-form energy-maximizing input distributions.

The optimum is a symmetric two- or three-point law whose shape depends on
the monotonicity of g(x) = [I0(theta * d(x)) - 1] / x^2 between sigma_x
and the peak amplitude.  Everything here reasons on amplitudes (x > 0);
distributions are reported with the symmetric +-x mass split.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import (
    GridSpec,
    MassDistribution,
    SystemConfig,
    column_costs,
    column_energies,
    effective_output,
    energy_metric,
    input_grid,
    mutual_information,
)
from .hpa import predistort, saturation_input
from .specfun import bessel_i0

CASE_PEAK = "PeakDominated"
CASE_DECREASING = "GDecreasing"
CASE_INCREASING = "GIncreasing"
CASE_INCREASE_THEN_DECREASE = "GIncreaseThenDecrease"

_CASE_TAGS = (CASE_PEAK, CASE_DECREASING, CASE_INCREASING, CASE_INCREASE_THEN_DECREASE)


class ClassificationAmbiguous(RuntimeError):
    """The scanned g profile does not fit any single-turning-point case."""


@dataclass(frozen=True)
class P1Solution:
    """Energy-maximizing law: mass p_active split over +-lam, remainder at 0."""

    dist: MassDistribution
    e_max: float
    p_active: float
    lam: float
    case_tag: str


def g_func(x, config: SystemConfig):
    """Energy density per unit input power, g(x) = [I0(theta*|out(x)|) - 1]/x^2.

    theta = b_rect * |h_e|.  Defined for x > 0; the x -> 0+ limit is
    (theta/2)^2 when the amplifier is transparent at small amplitudes.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("g_func requires x > 0")
    theta = config.b_rect * abs(config.h_e)
    amp = np.abs(np.asarray(effective_output(x, config)))
    out = (bessel_i0(theta * amp) - 1.0) / (x * x)
    return float(out) if out.ndim == 0 else out


def _golden_max(f, lo: float, hi: float, xtol: float) -> float:
    invphi = 0.5 * (np.sqrt(5.0) - 1.0)
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def classify_g(
    config: SystemConfig,
    interval: tuple[float, float] | None = None,
    n_scan: int = 20000,
) -> tuple[str, float | None]:
    """Classify the monotonicity of g on (sigma_x, a_peak).

    Dense finite-difference sign scan; a single +/- transition marks an
    interior maximizer, refined by golden section to 1e-6.  Profiles with
    more than one transition, or a minimum, raise ClassificationAmbiguous.
    Returns (case_tag, turning_point_or_None).
    """
    if interval is None:
        interval = (float(np.sqrt(config.sigma2)), config.a_peak)
    lo, hi = interval
    if not (0 < lo < hi):
        raise ValueError(f"invalid scan interval {interval}")
    if n_scan < 10000:
        raise ValueError("n_scan must be at least 10000")
    xs = np.linspace(lo, hi, n_scan + 1)
    gs = g_func(xs, config)
    diffs = np.diff(gs)
    flat_tol = 1e-12 * np.max(np.abs(gs))
    signs = np.sign(np.where(np.abs(diffs) <= flat_tol, 0.0, diffs))
    signs = signs[signs != 0]
    if signs.size == 0:
        return CASE_DECREASING, None  # numerically flat: any lam ties, take sigma_x
    changes = np.flatnonzero(np.diff(signs) != 0)
    if changes.size == 0:
        return (CASE_INCREASING if signs[0] > 0 else CASE_DECREASING), None
    if changes.size > 1 or signs[0] < 0:
        raise ClassificationAmbiguous(
            f"g has {changes.size + 1} monotone segments on {interval}, "
            "starting " + ("downward" if signs[0] < 0 else "upward")
        )
    k = int(np.argmax(gs))
    step = (hi - lo) / n_scan
    b_lo = xs[max(k - 1, 0)]
    b_hi = xs[min(k + 1, n_scan)]
    a_prime = _golden_max(lambda t: g_func(t, config), b_lo, b_hi, 1e-7)
    # a turn within one scan step of either endpoint is numerical noise
    if a_prime >= hi - step:
        return CASE_INCREASING, None
    if a_prime <= lo + step:
        return CASE_DECREASING, None
    return CASE_INCREASE_THEN_DECREASE, float(a_prime)


def _symmetric_dist(lam: float, p_active: float) -> MassDistribution:
    if p_active >= 1.0 - 1e-15:
        return MassDistribution.from_arrays([-lam, lam], [0.5, 0.5])
    half = 0.5 * p_active
    return MassDistribution.from_arrays(
        [-lam, 0.0, lam], [half, 1.0 - p_active, half]
    )


def _solve_p1_plain(config: SystemConfig, artificial_peak: bool) -> P1Solution:
    sigma_x = float(np.sqrt(config.sigma2))
    a = config.a_peak
    theta = config.b_rect * abs(config.h_e)
    if a * a <= config.sigma2:
        case, lam, p_active = CASE_PEAK, a, 1.0
    else:
        case, a_prime = classify_g(config)
        if case == CASE_DECREASING:
            lam, p_active = sigma_x, 1.0
        elif case == CASE_INCREASING:
            if artificial_peak:
                raise RuntimeError(
                    "g increasing up to an artificial amplitude cap; cap too small"
                )
            lam, p_active = a, config.sigma2 / (a * a)
        else:
            lam, p_active = a_prime, config.sigma2 / (a_prime * a_prime)
            if config.hpa is not None:
                rel = abs(a_prime - config.hpa.a_s) / config.hpa.a_s
                if rel > 0.05:
                    warnings.warn(
                        f"g turning point {a_prime:.6g} sits {100 * rel:.1f}% away "
                        f"from the saturation voltage {config.hpa.a_s:g}",
                        stacklevel=3,
                    )
    dist = _symmetric_dist(lam, p_active)
    d_lam = abs(float(np.asarray(effective_output(lam, config))))
    e_max = p_active * float(bessel_i0(theta * d_lam)) + (1.0 - p_active)
    check = energy_metric(dist, config)
    if abs(check - e_max) > 1e-9:
        raise RuntimeError(
            f"energy formula ({e_max!r}) and direct metric ({check!r}) disagree"
        )
    return P1Solution(dist=dist, e_max=e_max, p_active=p_active, lam=lam, case_tag=case)


def solve_p1(config: SystemConfig) -> P1Solution:
    """Maximum-energy input law under the average and peak power constraints.

    With predistortion the problem is solved in the predistorted-amplitude
    domain u = q(x), where the amplifier sees u directly and power is u^2;
    that is the plain problem again with the peak moved to q(a_peak).  When
    a_peak reaches the saturation voltage the supremum sits at outputs
    approaching a_s without being attained and q blows up, so the peak is
    capped at q(a_s (1 - 1e-12)): the cap keeps the map-back x = d(u)
    strictly below a_s (one branch of the clipped inverse) and gives up
    O(1e-12) of the metric.  Solutions map back through x = d(u).
    """
    if not (config.hpa is not None and config.predistortion):
        return _solve_p1_plain(config, artificial_peak=False)
    sigma_x = float(np.sqrt(config.sigma2))
    if config.a_peak < config.hpa.a_s:
        u_peak = float(np.asarray(predistort(config.a_peak, config.hpa)))
        artificial = False
    else:
        a0 = saturation_input(config.hpa, 1e-6)
        u_cap = float(
            np.asarray(predistort(config.hpa.a_s * (1.0 - 1e-12), config.hpa))
        )
        window = 2.0 * max(a0, sigma_x)
        if u_cap <= window:
            # invertible branch ends below the scan window: a genuine peak,
            # so a g increasing all the way up to it is a valid outcome
            u_peak, artificial = u_cap, False
        else:
            u_peak, artificial = window, True
    u_config = SystemConfig(
        h_i=config.h_i,
        h_e=config.h_e,
        b_rect=config.b_rect,
        sigma2=config.sigma2,
        a_peak=u_peak,
        hpa=config.hpa,
        predistortion=False,
    )
    sol_u = _solve_p1_plain(u_config, artificial_peak=artificial)
    lam_x = abs(float(np.asarray(effective_output(sol_u.lam, u_config))))
    dist = _symmetric_dist(lam_x, sol_u.p_active)
    check = energy_metric(dist, config)
    if abs(check - sol_u.e_max) > 1e-9:
        raise RuntimeError(
            f"predistorted energy mismatch: {sol_u.e_max!r} vs {check!r}"
        )
    return P1Solution(
        dist=dist,
        e_max=sol_u.e_max,
        p_active=sol_u.p_active,
        lam=lam_x,
        case_tag=sol_u.case_tag,
    )


def i_min(config: SystemConfig) -> float:
    """Information rate (bits) achieved by the energy-maximizing law."""
    return mutual_information(solve_p1(config).dist, config)


def brute_force_p1(
    config: SystemConfig, grid: GridSpec
) -> tuple[MassDistribution, float]:
    """Discrete LP oracle for the energy maximum.

    Maximizing a linear objective over {p >= 0, sum p = 1, sum p c <= budget}
    puts the optimum on a vertex with at most two support magnitudes, so an
    exhaustive singleton + active-constraint pair search is exact for the
    given grid.
    """
    if grid.n_in > 512:
        raise ValueError("brute force limited to n_in <= 512")
    x = input_grid(grid, config)
    mags = np.unique(np.abs(x))
    w = column_energies(mags, config)
    c = column_costs(mags, config)
    budget = config.sigma2

    best_val = -np.inf
    best = None  # (mag_a, mag_b, p_b); singletons have p_b = 0
    feasible = c <= budget + 1e-12
    if np.any(feasible):
        k = int(np.argmax(np.where(feasible, w, -np.inf)))
        best_val = float(w[k])
        best = (mags[k], mags[k], 0.0)
    ia, ib = np.triu_indices(mags.size, k=1)
    lo_c, hi_c = np.minimum(c[ia], c[ib]), np.maximum(c[ia], c[ib])
    swap = c[ia] > c[ib]
    lo_i = np.where(swap, ib, ia)
    hi_i = np.where(swap, ia, ib)
    ok = (lo_c <= budget) & (hi_c > budget) & (hi_c > lo_c)
    if np.any(ok):
        frac = (budget - lo_c[ok]) / (hi_c[ok] - lo_c[ok])
        vals = (1.0 - frac) * w[lo_i[ok]] + frac * w[hi_i[ok]]
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val = float(vals[j])
            best = (mags[lo_i[ok][j]], mags[hi_i[ok][j]], float(frac[j]))

    if best is None:
        raise RuntimeError("no feasible grid point under the power budget")
    mag_a, mag_b, p_b = best
    masses: dict[float, float] = {}
    for m, p in ((float(mag_a), 1.0 - p_b), (float(mag_b), p_b)):
        if p <= 0:
            continue
        if m == 0.0:
            masses[0.0] = masses.get(0.0, 0.0) + p
        else:
            masses[m] = masses.get(m, 0.0) + 0.5 * p
            masses[-m] = masses.get(-m, 0.0) + 0.5 * p
    locs = sorted(masses)
    dist = MassDistribution.from_arrays(locs, [masses[m] for m in locs])
    return dist, best_val


def g_curve_table(
    config: SystemConfig, x_lo: float, x_hi: float, n: int = 400
) -> np.ndarray:
    """Two-column (x, g(x)) table for plotting the energy-density profile."""
    xs = np.linspace(x_lo, x_hi, n)
    return np.column_stack([xs, g_func(xs, config)])
