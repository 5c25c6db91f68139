"""Constrained capacity of the discretized channel.

Maximizes mutual information over input probability vectors subject to an
average-power budget and an optional harvested-energy floor, via the
multiplier-reweighted Blahut-Arimoto fixed point with bisection on each
multiplier.  Internals run in nats; everything reported is in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import (
    MassDistribution,
    SystemConfig,
    TransitionMatrix,
    column_costs,
    column_energies,
    effective_output,
    mi_from_matrix,
)
from .specfun import bessel_i0, binary_entropy, q_func

_LOG2 = float(np.log(2.0))

# Largest effective output amplitude for which equiprobable binary inputs
# stay capacity-optimal under a slack power budget.
AMP_THRESHOLD = 1.665


class NotConverged(RuntimeError):
    """Iteration caps were exhausted with the KKT gap above tolerance."""


class InfeasibleEnergyFloor(ValueError):
    """Requested energy floor exceeds the maximum achievable on the grid."""


@dataclass(frozen=True)
class MultiplierSearch:
    """Bracketing and stopping control for the root search on each multiplier."""

    mu_max: float = 1e6
    nu_max: float = 1e6
    rel_tol: float = 1e-9
    constraint_tol: float = 1e-9

    def __post_init__(self):
        for name in ("mu_max", "nu_max", "rel_tol", "constraint_tol"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 50000
    mi_tol: float = 1e-8  # bits; inner fixed-point gap target
    kkt_tol: float = 1e-5  # bits; certification threshold
    multiplier_search: MultiplierSearch = field(default_factory=MultiplierSearch)
    support_threshold: float = 1e-6
    merge_radius: float | None = None  # None: twice the grid step

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        for name in ("mi_tol", "kkt_tol", "support_threshold"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive")
        if self.merge_radius is not None and not (self.merge_radius > 0):
            raise ValueError("merge_radius must be positive when given")


@dataclass(frozen=True)
class CapacitySolution:
    p_star: np.ndarray
    i_max: float
    e_at_opt: float
    power_at_opt: float
    kkt_gap: float
    mass_points: MassDistribution
    mu_power: float  # bits per watt
    nu_energy: float  # bits per unit energy metric
    diagnostics: dict


def _entropy_terms(probs: np.ndarray) -> np.ndarray:
    """S_j = sum_i p_ij ln p_ij (negative conditional output entropy)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(probs > 0, probs * np.log(probs), 0.0)
    return t.sum(axis=0)


def _ba_core(probs, entropy, net_cost, p, tol_nats, max_iters):
    """Iterate p_j <- p_j exp(D_j - net_cost_j) / Z to a fixed point.

    Returns (p, objective_history, gap, iterations).  The objective
    sum_j p_j (D_j - net_cost_j) is the Lagrangian in nats; it ascends at
    every step up to rounding, which is checked.
    """
    history = []
    gap = np.inf
    stall_ref = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        q = probs @ p
        with np.errstate(divide="ignore"):
            log_q = np.where(q > 0, np.log(q), 0.0)
        d_vec = entropy - probs.T @ log_q
        t_vec = d_vec - net_cost
        obj = float(p @ t_vec)
        if history and obj < history[-1] - 1e-8:
            raise RuntimeError(
                f"fixed-point objective decreased: {history[-1]!r} -> {obj!r}"
            )
        history.append(obj)
        gap = float(t_vec.max() - obj)
        if gap <= tol_nats:
            break
        if it % 1000 == 0:  # bail out of sub-geometric tails
            if gap > 0.9999 * stall_ref:
                break
            stall_ref = gap
        p = p * np.exp(t_vec - t_vec.max())
        p = p / p.sum()
    return p, history, gap, it


def _refine_support(pmat, entropy, net_cost, p0, tol=1e-12, max_iter=200):
    """Exact maximizer of the restricted objective on the probability simplex.

    Maximizes sum_j p_j*(S_j - c_j) + H(pmat @ p) over p in the simplex by
    equality-constrained Newton steps with bound handling.  The fixed-point
    iteration equalizes scores between neighboring columns only at a
    geometric rate proportional to their score gap, which stalls when a
    continuum mass point falls between two grid columns; second-order
    steps resolve the split exactly so support membership becomes a
    zero/nonzero fact instead of a tolerance race.

    Adjacent columns of a fine grid are nearly collinear, so the reduced
    Hessian can be singular to working precision and the raw Newton
    direction may even point against the gradient on a bound column.  A
    Levenberg ridge handles that: any sign of an unreliable direction
    (re-releasing a column the previous step rejected, or a failed line
    search) inflates the ridge so the step bends toward projected
    gradient, and successful steps decay it back.  Returns the refined
    vector and a flag telling whether first-order optimality was met.
    """
    p = np.maximum(np.asarray(p0, dtype=float), 0.0)
    p = p / p.sum()
    free = p > 0
    damp = 1e-13
    last_release = None

    def objective(vec):
        q = pmat @ vec
        lq = np.log(np.maximum(q, 1e-300))
        return float(vec @ (entropy - net_cost)) - float(q @ lq)

    obj = objective(p)
    converged = False
    for _ in range(max_iter):
        q = pmat @ p
        lq = np.log(np.maximum(q, 1e-300))
        grad = entropy - net_cost - pmat.T @ (lq + 1.0)
        idx = np.flatnonzero(free)
        sub = pmat[:, idx]
        weighted = sub / np.maximum(q, 1e-300)[:, None]
        hess = weighted.T @ sub
        hess.flat[:: hess.shape[0] + 1] += damp * max(1.0, hess.trace() / hess.shape[0])
        ones = np.ones(idx.size)
        try:
            y_grad = np.linalg.solve(hess, grad[idx])
            y_ones = np.linalg.solve(hess, ones)
        except np.linalg.LinAlgError:
            y_grad = np.linalg.lstsq(hess, grad[idx], rcond=None)[0]
            y_ones = np.linalg.lstsq(hess, ones, rcond=None)[0]
        lam = float(ones @ y_grad) / float(ones @ y_ones)
        delta = y_grad - lam * y_ones
        release = (~free) & (grad > lam + 1e-10)
        crit = float(np.abs(grad[idx] - lam).max())
        if crit <= tol and not release.any():
            converged = True
            break
        if release.any():
            if last_release is not None and (release & last_release).any():
                damp = min(damp * 1e4, 1e6)
            last_release = release.copy()
            free = free | release
            continue
        # a zero-mass column pushed further negative goes back to its bound
        stuck = (p[idx] <= 0.0) & (delta < 0.0)
        if stuck.any():
            free[idx[stuck]] = False
            continue
        down = delta < 0.0
        max_step = float(np.min(p[idx][down] / -delta[down])) if down.any() else np.inf
        # full clipped step first: it can zero many columns at once
        alpha = 1.0
        tried_bound = max_step >= 1.0
        moved = False
        for _bt in range(40):
            cand = p.copy()
            cand[idx] = p[idx] + alpha * delta
            cand = np.maximum(cand, 0.0)
            cand = cand / cand.sum()
            cand_obj = objective(cand)
            if cand_obj >= obj - 1e-13 and not np.array_equal(cand, p):
                p = cand
                obj = cand_obj
                moved = True
                break
            if not tried_bound and max_step < alpha:
                alpha = max_step
                tried_bound = True
            else:
                alpha *= 0.5
        if moved:
            damp = max(damp * 1e-2, 1e-13)
            free = p > 0
        else:
            if damp >= 1e6:
                break
            damp = min(damp * 1e4, 1e6)
    return p, converged


def _score_peaks(t_full, candidates):
    """Restrict candidate columns to local maxima of the score curve.

    A hole in the output marginal raises the scores of a whole run of
    adjacent columns; admitting only the peak of each run keeps the
    active set small while still filling every hole.
    """
    if candidates.size == 0:
        return candidates
    left = np.r_[-np.inf, t_full[:-1]]
    right = np.r_[t_full[1:], -np.inf]
    is_peak = (t_full >= left) & (t_full >= right)
    peaks = candidates[is_peak[candidates]]
    return peaks if peaks.size else candidates[np.argmax(t_full[candidates])][None]


def _solve_fixed_multipliers(probs, entropy, net_cost, opts, p0=None):
    """Two-phase solve of the fixed-multiplier problem.

    Phase 1 is active-set fixed-point iteration: capped rounds cull the
    grid to a small candidate set, and after each round the fixed-point
    scores are checked on the full grid; columns scoring clearly below the
    support level are dropped, score peaks above it are re-admitted.
    Phase 2 refines the restricted problem exactly, so dust mass hits zero
    instead of decaying geometrically, and repeats the full-grid check at
    a tight margin.  A fast attempt with shallow rounds handles the common
    case; if it ends with violations outstanding the solve restarts cold
    at full depth.  The caller certifies the final gap.
    """
    n = probs.shape[1]
    tol_nats = opts.mi_tol * _LOG2
    final_margin = 0.5 * opts.kkt_tol * _LOG2
    readd_margin = 0.25 * opts.kkt_tol * _LOG2
    histories = []
    counters = {"iterations": 0}

    def attempt(p_start, deep):
        caps = [min(2000, opts.max_iters), min(5000, opts.max_iters)]
        late_cap = opts.max_iters if deep else min(3000, opts.max_iters)
        margins = [max(1e-3, final_margin), max(1e-4, final_margin)]
        if p_start is None:
            p_full = np.full(n, 1.0 / n)
        else:
            p_full = np.asarray(p_start, dtype=float)
            p_full = p_full / p_full.sum()
        active = np.flatnonzero(p_full > 0)
        p_act = p_full[active] / p_full[active].sum()
        if active.size == n and n > 8:
            p_act, h, _, used = _ba_core(probs, entropy, net_cost, p_act, tol_nats, 200)
            histories.append(h)
            counters["iterations"] += used
            keep = p_act > 1e-12
            active = active[keep]
            p_act = p_act[keep] / p_act[keep].sum()
        rounds = 0
        for rounds in range(1, 17):
            k = rounds - 1
            cap = caps[k] if k < len(caps) else late_cap
            margin = margins[k] if k < len(margins) else final_margin
            p_act, h, _, used = _ba_core(
                probs[:, active], entropy[active], net_cost[active],
                p_act, tol_nats, cap,
            )
            histories.append(h)
            counters["iterations"] += used
            q = probs[:, active] @ p_act
            with np.errstate(divide="ignore"):
                log_q = np.where(q > 0, np.log(q), 0.0)
            t_full = entropy - probs.T @ log_q - net_cost
            cbar = float(p_act @ t_full[active])
            dust = t_full[active] < cbar - margin
            new = np.setdiff1d(
                _score_peaks(t_full, np.flatnonzero(t_full > cbar + readd_margin)),
                active,
            )
            if margin == final_margin and not dust.any() and new.size == 0:
                break
            if dust.any():
                active = active[~dust]
                p_act = p_act[~dust]
                p_act = p_act / p_act.sum()
            if new.size:
                seed = max(1e-6, 0.1 / n)
                merged = np.concatenate([active, new])
                order = np.argsort(merged)
                p_act = np.concatenate([p_act, np.full(new.size, seed)])[order]
                active = merged[order]
                p_act = p_act / p_act.sum()
        refine_rounds = 0
        viol = np.inf
        refine_ok = False
        for refine_rounds in range(1, 17):
            p_act, refine_ok = _refine_support(
                probs[:, active], entropy[active], net_cost[active], p_act,
            )
            keep = p_act > 0
            active = active[keep]
            p_act = p_act[keep]
            q = probs[:, active] @ p_act
            with np.errstate(divide="ignore"):
                log_q = np.where(q > 0, np.log(q), 0.0)
            t_full = entropy - probs.T @ log_q - net_cost
            cbar = float(p_act @ t_full[active])
            # interior spread counts too: a stalled refine leaves supported
            # columns off the common score level without any outside violator
            viol = max(
                float(t_full.max() - cbar),
                float(np.abs(t_full[active] - cbar).max()),
            )
            new = np.setdiff1d(
                _score_peaks(t_full, np.flatnonzero(t_full > cbar + 1e-9)),
                active,
            )
            if new.size == 0 and refine_ok:
                break
            merged = np.concatenate([active, new])
            order = np.argsort(merged)
            p_act = np.concatenate([p_act, np.full(new.size, 1e-6)])[order]
            active = merged[order]
            p_act = p_act / p_act.sum()
        p_out = np.zeros(n)
        p_out[active] = p_act
        clean = new.size == 0 and refine_ok
        return p_out, clean, viol, rounds, refine_rounds

    p_full, clean, viol, rounds, refine_rounds = attempt(p0, deep=False)
    escalated = False
    if not clean:
        escalated = True
        p_retry, clean2, viol2, rounds, refine_rounds = attempt(None, deep=True)
        if clean2 or viol2 < viol:
            p_full = p_retry
    diag = {
        "objective_history": histories,
        "iterations": counters["iterations"],
        "rounds": rounds,
        "refine_rounds": refine_rounds,
        "escalated": escalated,
    }
    return p_full, diag


def solve_lagrangian(tm: TransitionMatrix, cost, energy, mu, nu, opts=None):
    """Input law maximizing I(p) - mu*<p,cost> + nu*<p,energy>; multipliers
    in nats per unit.  Exposed for monotonicity probes and tests."""
    opts = opts or SolverOptions()
    entropy = _entropy_terms(tm.probs)
    net = mu * np.asarray(cost, dtype=float) - nu * np.asarray(energy, dtype=float)
    p, _ = _solve_fixed_multipliers(tm.probs, entropy, net, opts)
    return p


def _lp_max(values, cost, budget):
    """Exact max of <p, values> over {p >= 0, sum p = 1, <p, cost> <= budget}.

    A linear objective over that polytope peaks on a vertex with at most
    two support points (one when the budget is slack), so singleton and
    active-pair enumeration is exhaustive.
    """
    values = np.asarray(values, dtype=float)
    cost = np.asarray(cost, dtype=float)
    best = -np.inf
    feas = cost <= budget + 1e-12
    if np.any(feas):
        best = float(np.max(np.where(feas, values, -np.inf)))
    ia, ib = np.triu_indices(values.size, k=1)
    swap = cost[ia] > cost[ib]
    lo_i = np.where(swap, ib, ia)
    hi_i = np.where(swap, ia, ib)
    lo_c, hi_c = cost[lo_i], cost[hi_i]
    ok = (lo_c <= budget) & (hi_c > budget)
    if np.any(ok):
        frac = (budget - lo_c[ok]) / (hi_c[ok] - lo_c[ok])
        vals = (1.0 - frac) * values[lo_i[ok]] + frac * values[hi_i[ok]]
        best = max(best, float(vals.max()))
    if not np.isfinite(best):
        raise ValueError("no feasible point under the cost budget")
    return best


def grid_energy_max(tm: TransitionMatrix, config: SystemConfig) -> float:
    """Largest energy metric expressible on the grid under the power budget."""
    return _lp_max(
        column_energies(tm.x_grid, config),
        column_costs(tm.x_grid, config),
        config.sigma2,
    )


def _is_symmetric_grid(x: np.ndarray) -> bool:
    return bool(np.allclose(x, -x[::-1], rtol=0.0, atol=1e-12 * max(1.0, x[-1])))


def extract_mass_points(p_star, x_grid, opts: SolverOptions | None = None) -> MassDistribution:
    """Prune sub-threshold grid mass and merge adjacent survivors.

    Surviving runs of points closer than merge_radius collapse to their
    probability-weighted centroid; the result is renormalized.
    """
    opts = opts or SolverOptions()
    p = np.asarray(p_star, dtype=float).copy()
    x = np.asarray(x_grid, dtype=float)
    if _is_symmetric_grid(x):
        p = 0.5 * (p + p[::-1])
    radius = opts.merge_radius
    if radius is None:
        radius = 2.0 * float(np.median(np.diff(x)))
    keep = np.flatnonzero(p > opts.support_threshold)
    if keep.size == 0:
        raise ValueError("no mass above support_threshold")
    xk, pk = x[keep], p[keep]
    locs, probs = [], []
    start = 0
    for stop in range(1, keep.size + 1):
        if stop == keep.size or xk[stop] - xk[stop - 1] > radius:
            w = pk[start:stop]
            locs.append(float(np.dot(xk[start:stop], w) / w.sum()))
            probs.append(float(w.sum()))
            start = stop
    probs = np.asarray(probs) / np.sum(probs)
    return MassDistribution.from_arrays(locs, probs)


def _falsi(lo, hi, f_lo, f_hi):
    """Secant point through the bracket ends, or the plain midpoint when
    the interpolant is degenerate or leaves the open interval."""
    denom = f_hi - f_lo
    if not np.isfinite(denom) or denom == 0.0:
        return 0.5 * (lo + hi)
    mid = hi - f_hi * (hi - lo) / denom
    if not lo < mid < hi:
        return 0.5 * (lo + hi)
    return float(mid)


def solve_capacity(
    tm: TransitionMatrix,
    config: SystemConfig,
    energy_floor: float | None = None,
    opts: SolverOptions | None = None,
) -> CapacitySolution:
    """Capacity of the discretized channel under the average-power budget
    and an optional lower bound on the harvested-energy metric.

    Outer loop: root search for the smallest power multiplier mu >= 0
    whose solution meets the budget.  Inner loop (per mu probe): root
    search for the smallest energy multiplier nu >= 0 whose solution
    reaches the floor.  Innermost: the reweighted fixed point.  Both
    searches bracket by doubling and then close in with safeguarded false
    position.  The returned solution carries a full-grid KKT certificate
    in bit units.
    """
    opts = opts or SolverOptions()
    ms = opts.multiplier_search
    probs = tm.probs
    x = tm.x_grid
    cost = column_costs(x, config)
    energy = column_energies(x, config)
    entropy = _entropy_terms(probs)
    budget = config.sigma2
    ctol = ms.constraint_tol

    floor_active = energy_floor is not None
    if floor_active:
        e_cap = _lp_max(energy, cost, budget)
        if energy_floor > e_cap + 1e-9:
            raise InfeasibleEnergyFloor(
                f"energy floor {energy_floor:.9g} exceeds grid maximum {e_cap:.9g}"
            )

    bisection_log: list[dict] = []
    # last accepted nu, reused to seed the bracket of the next mu probe;
    # nearby mu values have nearby nu roots, so the doubling phase usually
    # terminates on the first evaluation
    nu_seed = [1.0]

    def solve_energy_constrained(mu: float, p_start):
        """nu search at fixed mu; successive probes warm-start from the
        previous solution, so only the very first solve sees the full grid.
        Bracket midpoints come from Illinois false position on the energy
        residual, with a plain halving every third step as the termination
        guarantee."""
        net0 = mu * cost
        p0, _ = _solve_fixed_multipliers(probs, entropy, net0, opts, p0=p_start)
        e0 = float(p0 @ energy)
        if not floor_active or e0 >= energy_floor - ctol:
            return p0, 0.0
        warm = p0
        nu_lo, f_lo = 0.0, e0 - energy_floor
        nu_hi = nu_seed[0]
        while True:
            p_hi, _ = _solve_fixed_multipliers(
                probs, entropy, net0 - nu_hi * energy, opts, p0=warm
            )
            warm = p_hi
            e_hi = float(p_hi @ energy)
            bisection_log.append({"mu": mu, "nu": nu_hi, "energy": e_hi})
            if e_hi >= energy_floor - ctol:
                break
            nu_lo, f_lo = nu_hi, e_hi - energy_floor
            nu_hi *= 2.0
            if nu_hi > ms.nu_max:
                raise NotConverged(
                    f"energy floor {energy_floor:.9g} unreached at nu={nu_lo:.3g}"
                )
        f_hi = e_hi - energy_floor
        step = last_side = 0
        # feasibility stays at the absolute tolerance; the attainment exit
        # scales with the floor so large energy targets stop grinding once
        # the overshoot is negligible in relative terms
        e_exit = ctol * max(1.0, energy_floor)
        while (
            nu_hi - nu_lo > ms.rel_tol * nu_hi
            and float(p_hi @ energy) - energy_floor > e_exit
        ):
            if step % 3 == 2:
                mid = 0.5 * (nu_lo + nu_hi)
            else:
                mid = _falsi(nu_lo, nu_hi, f_lo, f_hi)
            step += 1
            p_mid, _ = _solve_fixed_multipliers(
                probs, entropy, net0 - mid * energy, opts, p0=warm
            )
            warm = p_mid
            e_mid = float(p_mid @ energy)
            bisection_log.append({"mu": mu, "nu": mid, "energy": e_mid})
            if e_mid >= energy_floor - ctol:
                nu_hi, p_hi, f_hi = mid, p_mid, e_mid - energy_floor
                if last_side > 0:
                    f_lo *= 0.5
                last_side = 1
            else:
                nu_lo, f_lo = mid, e_mid - energy_floor
                if last_side < 0:
                    f_hi *= 0.5
                last_side = -1
        nu_seed[0] = max(nu_hi, ms.rel_tol)
        return p_hi, nu_hi

    # power multiplier: mu = 0 unless the budget is actually violated there
    p_sol, nu_sol = solve_energy_constrained(0.0, None)
    mu_sol = 0.0
    if float(p_sol @ cost) > budget + ctol:
        warm_mu = p_sol
        mu_lo, g_lo = 0.0, float(p_sol @ cost) - budget
        mu_hi = 1.0
        while True:
            p_hi, nu_hi = solve_energy_constrained(mu_hi, warm_mu)
            warm_mu = p_hi
            pw = float(p_hi @ cost)
            bisection_log.append({"mu": mu_hi, "power": pw})
            if pw <= budget + ctol:
                break
            mu_lo, g_lo = mu_hi, pw - budget
            mu_hi *= 2.0
            if mu_hi > ms.mu_max:
                raise NotConverged(f"power budget unmet at mu={mu_lo:.3g}")
        g_hi = pw - budget
        step = last_side = 0
        # same relative attainment exit on the power side; accepted points
        # themselves still satisfy the budget to the absolute tolerance
        p_exit = ctol * max(1.0, budget)
        while (
            mu_hi - mu_lo > ms.rel_tol * mu_hi
            and budget - float(p_hi @ cost) > p_exit
        ):
            if step % 3 == 2:
                mid = 0.5 * (mu_lo + mu_hi)
            else:
                mid = _falsi(mu_lo, mu_hi, g_lo, g_hi)
            step += 1
            p_mid, nu_mid = solve_energy_constrained(mid, warm_mu)
            warm_mu = p_mid
            pw = float(p_mid @ cost)
            bisection_log.append({"mu": mid, "power": pw})
            if pw <= budget + ctol:
                mu_hi, p_hi, nu_hi, g_hi = mid, p_mid, nu_mid, pw - budget
                if last_side > 0:
                    g_lo *= 0.5
                last_side = 1
            else:
                mu_lo, g_lo = mid, pw - budget
                if last_side < 0:
                    g_hi *= 0.5
                last_side = -1
        p_sol, nu_sol, mu_sol = p_hi, nu_hi, mu_hi

    # exact symmetry when the problem has it
    if _is_symmetric_grid(x):
        p_sym = 0.5 * (p_sol + p_sol[::-1])
        before = mi_from_matrix(probs, p_sol)
        after = mi_from_matrix(probs, p_sym)
        if abs(after - before) > 1e-9:
            raise RuntimeError(
                f"symmetrization moved MI by {after - before:.3e} bits"
            )
        p_sol = p_sym

    p_sol = np.where(p_sol < 1e-13, 0.0, p_sol)
    p_sol = p_sol / p_sol.sum()

    q = probs @ p_sol
    with np.errstate(divide="ignore"):
        log_q = np.where(q > 0, np.log(q), 0.0)
    d_vec = entropy - probs.T @ log_q
    scores = (d_vec - mu_sol * cost + nu_sol * energy) / _LOG2
    support = p_sol > opts.support_threshold
    if not np.any(support):
        support = p_sol == p_sol.max()
    cbar = float(p_sol @ scores)
    kkt_gap = max(
        float(scores.max() - cbar),
        float(np.max(np.abs(scores[support] - cbar))),
        0.0,
    )
    if kkt_gap > opts.kkt_tol:
        raise NotConverged(
            f"KKT gap {kkt_gap:.3e} bits above tolerance {opts.kkt_tol:.3e}"
        )

    i_max = mi_from_matrix(probs, p_sol)
    solution = CapacitySolution(
        p_star=p_sol,
        i_max=i_max,
        e_at_opt=float(p_sol @ energy),
        power_at_opt=float(p_sol @ cost),
        kkt_gap=kkt_gap,
        mass_points=extract_mass_points(p_sol, x, opts),
        mu_power=mu_sol / _LOG2,
        nu_energy=nu_sol / _LOG2,
        diagnostics={"bisection": bisection_log},
    )
    return solution


def binary_optimum_closed_form(config: SystemConfig):
    """Closed-form capacity point when equiprobable +-a_peak binary input
    is optimal: small effective amplitude and a slack power budget.

    Returns (i_max_bits, e_min) or None outside the applicable regime.
    """
    d_a = abs(float(np.asarray(effective_output(config.a_peak, config))))
    if d_a > AMP_THRESHOLD or config.a_peak**2 > config.sigma2:
        return None
    pe = q_func(abs(config.h_i) * d_a)
    i_max = 1.0 - binary_entropy(pe)
    e_min = float(bessel_i0(config.b_rect * abs(config.h_e) * d_a))
    return float(i_max), e_min


def brute_force_capacity(
    tm: TransitionMatrix,
    cost=None,
    cost_budget: float | None = None,
    energy=None,
    energy_floor: float | None = None,
    step: float = 1e-3,
) -> float:
    """Dense simplex sweep oracle for tiny channels (n_in <= 4); bits.

    Enumerates every probability vector on a step-resolution lattice,
    filters by the optional budget/floor, and evaluates MI directly.
    """
    probs = tm.probs
    n = probs.shape[1]
    if n > 4:
        raise ValueError("brute force limited to n_in <= 4")
    levels = int(round(1.0 / step))
    if (levels + 1) ** (n - 1) > 3e7:
        raise ValueError("step too fine for this input cardinality")
    axes = np.meshgrid(*([np.arange(levels + 1)] * (n - 1)), indexing="ij")
    head = np.stack([a.ravel() for a in axes]) if n > 1 else np.zeros((0, 1), int)
    total = head.sum(axis=0)
    ok = total <= levels
    head = head[:, ok]
    last = levels - total[ok]
    lattice = np.vstack([head, last]).astype(float) / levels

    if cost is not None and cost_budget is not None:
        lattice = lattice[:, np.asarray(cost, float) @ lattice <= cost_budget + 1e-12]
    if energy is not None and energy_floor is not None:
        lattice = lattice[:, np.asarray(energy, float) @ lattice >= energy_floor - 1e-12]
    if lattice.shape[1] == 0:
        raise ValueError("no lattice point satisfies the constraints")

    entropy = _entropy_terms(probs)
    best = 0.0
    chunk = max(1, int(2e6 / probs.shape[0]))
    for lo in range(0, lattice.shape[1], chunk):
        ps = lattice[:, lo : lo + chunk]
        q = probs @ ps
        with np.errstate(divide="ignore", invalid="ignore"):
            h_y = -np.sum(np.where(q > 0, q * np.log(q), 0.0), axis=0)
        i_vals = (h_y + entropy @ ps) / _LOG2
        best = max(best, float(i_vals.max()))
    return best


def solution_record(
    solution: CapacitySolution, config: SystemConfig, grid=None
) -> dict:
    """Plain-dict dump of a solve, ready for json.dumps."""
    rec = {
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
        "multipliers": {
            "power_bits": solution.mu_power,
            "energy_bits": solution.nu_energy,
        },
        "i_max_bits": solution.i_max,
        "e_at_opt": solution.e_at_opt,
        "power_at_opt": solution.power_at_opt,
        "kkt_gap_bits": solution.kkt_gap,
        "mass_points": [
            {"location": x, "probability": p} for x, p in solution.mass_points.points
        ],
    }
    if grid is not None:
        rec["grid"] = {"n_in": grid.n_in, "m_out": grid.m_out, "gamma": grid.gamma}
    return rec
