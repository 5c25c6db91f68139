"""Solid-state power amplifier AM-AM model and its ideal inverse (predistorter).

The amplitude map is applied to signed real symbols through the odd
extension d(-r) = -d(r); all functions broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Above this smoothness exponent the transition region is numerically a hard
# clip and the saturation input point coincides with the saturation voltage.
_HARD_CLIP_BETA = 50.0


@dataclass(frozen=True)
class HpaParams:
    """SSPA amplitude model: a_s output saturation voltage, beta smoothness."""

    a_s: float
    beta: float

    def __post_init__(self):
        if not (self.a_s > 0):
            raise ValueError(f"a_s must be positive, got {self.a_s}")
        if not (self.beta > 0):
            raise ValueError(f"beta must be positive, got {self.beta}")


def amam(r, params: HpaParams):
    """AM-AM conversion d(r) = r / (1 + (r/a_s)^(2 beta))^(1/(2 beta)).

    Odd in r, strictly increasing, |d(r)| < a_s for all finite r.
    Evaluated in the log domain so large (r/a_s)^(2 beta) cannot overflow.
    """
    r = np.asarray(r, dtype=float)
    a = np.abs(r)
    two_beta = 2.0 * params.beta
    with np.errstate(divide="ignore"):
        ell = two_beta * np.log(a / params.a_s)  # -inf at r = 0
    gain = np.exp(-np.logaddexp(0.0, ell) / two_beta)
    out = r * gain
    return float(out) if out.ndim == 0 else out


def saturation_input(params: HpaParams, tol: float) -> float:
    """Smallest input amplitude driving the output to within tol of a_s.

    d(r) -> a_s only asymptotically, so the point is defined to tolerance
    and found by bisection on the increasing d.  In the hard-clip regime
    (beta >= 50) the transition is numerically vertical and a_s itself is
    returned.
    """
    if not (tol > 0):
        raise ValueError("tol must be positive")
    if params.beta >= _HARD_CLIP_BETA:
        return params.a_s
    target = params.a_s - tol
    if target <= 0:
        return 0.0
    lo, hi = 0.0, params.a_s
    while amam(hi, params) < target:
        hi *= 2.0
        if hi > 1e18:
            raise RuntimeError("saturation_input bracket expansion failed")
    for _ in range(200):
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if amam(mid, params) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def predistort(r, params: HpaParams):
    """Ideal predistorter q = d^{-1} below saturation, clipped at +-a_s.

    q(r) = r / (1 - (r/a_s)^(2 beta))^(1/(2 beta)) for |r| < a_s;
    the 1 - (r/a_s)^(2 beta) factor is evaluated via expm1 to keep
    accuracy as |r| approaches a_s.
    """
    r = np.asarray(r, dtype=float)
    a = np.abs(r)
    two_beta = 2.0 * params.beta
    inner = a < params.a_s
    with np.errstate(divide="ignore", invalid="ignore"):
        ell = two_beta * np.log(np.where(inner, a, 0.5) / params.a_s)
        log_one_minus = np.log(-np.expm1(ell))  # log(1 - (a/a_s)^(2 beta))
        q_inner = r * np.exp(-log_one_minus / two_beta)
    out = np.where(inner, q_inner, np.sign(r) * params.a_s)
    out = np.where(a == 0.0, 0.0, out)
    return float(out) if out.ndim == 0 else out
