"""AWGN channel with an amplifier front end: densities, discretization,
mutual information and the harvested-energy metric.

Noise variance is fixed to 1 throughout.  Information is in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import logsumexp, ndtr

from .hpa import HpaParams, amam, predistort, saturation_input
from .specfun import bessel_i0

_LOG2 = float(np.log(2.0))
_H_NOISE_BITS = 0.5 * float(np.log2(2.0 * np.pi * np.e))  # h(N), N ~ N(0,1)


@dataclass(frozen=True)
class SystemConfig:
    """Link parameters.  hpa=None models an ideal (distortionless) amplifier."""

    h_i: float
    h_e: float
    b_rect: float
    sigma2: float
    a_peak: float
    hpa: HpaParams | None
    predistortion: bool = False

    def __post_init__(self):
        if not (self.b_rect > 0):
            raise ValueError(f"b_rect must be positive, got {self.b_rect}")
        if not (self.sigma2 > 0):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not (self.a_peak > 0):
            raise ValueError(f"a_peak must be positive, got {self.a_peak}")
        if self.predistortion and self.hpa is None:
            raise ValueError("predistortion requires an amplifier model")


@dataclass(frozen=True)
class GridSpec:
    """Discretization: n_in input points on [-a_peak, a_peak], m_out output
    bins on [-gamma, gamma]."""

    n_in: int
    m_out: int
    gamma: float

    def __post_init__(self):
        if self.n_in < 2:
            raise ValueError("n_in must be at least 2")
        if self.m_out < 2:
            raise ValueError("m_out must be at least 2")
        if not (self.gamma > 0):
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class MassDistribution:
    """Finite discrete input law as (location, probability) pairs."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        locs = np.array([p[0] for p in self.points], dtype=float)
        probs = np.array([p[1] for p in self.points], dtype=float)
        if locs.size == 0:
            raise ValueError("distribution needs at least one mass point")
        if np.any(np.diff(locs) <= 0):
            raise ValueError("locations must be strictly increasing")
        if np.any(probs < -1e-12):
            raise ValueError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, expected 1")

    @classmethod
    def from_arrays(cls, locations, probabilities) -> "MassDistribution":
        pts = tuple(
            (float(x), float(p))
            for x, p in zip(locations, probabilities, strict=True)
        )
        return cls(points=pts)

    @property
    def locations(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


@dataclass(frozen=True)
class TransitionMatrix:
    """Column-stochastic conditional law: probs[i, j] = P(Y in bin i | X = x_j)."""

    probs: np.ndarray
    x_grid: np.ndarray
    y_grid: np.ndarray

    def to_csv(self, path) -> None:
        # debugging aid; row = output bin, first column = bin center
        body = np.column_stack([self.y_grid, self.probs])
        header = "y," + ",".join(f"{x:.9g}" for x in self.x_grid)
        np.savetxt(path, body, delimiter=",", header=header, comments="")


def effective_output(x, config: SystemConfig):
    """Amplifier output amplitude for channel input x.

    Plain operation applies the AM-AM curve; with predistortion the symbol
    passes through the inverse map first, which linearizes the response
    below saturation and hard-clips above it.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > config.a_peak * (1.0 + 1e-12) + 1e-15):
        raise ValueError("input amplitude exceeds the peak constraint")
    if config.hpa is None:
        out = np.asarray(x + 0.0)
    elif config.predistortion:
        out = np.asarray(amam(predistort(x, config.hpa), config.hpa))
    else:
        out = np.asarray(amam(x, config.hpa))
    return float(out) if out.ndim == 0 else out


def transmitted_amplitude(x, config: SystemConfig):
    """Amplitude fed to the amplifier: the predistorted symbol when
    predistortion is on, the raw symbol otherwise.  This is the quantity
    that consumes average transmit power."""
    if config.hpa is not None and config.predistortion:
        return predistort(x, config.hpa)
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def conditional_pdf(y, x, config: SystemConfig):
    """Channel density p(y|x): unit-variance Gaussian centered at
    h_i * effective_output(x)."""
    y = np.asarray(y, dtype=float)
    mu = config.h_i * np.asarray(effective_output(x, config))
    out = np.exp(-0.5 * (y - mu) ** 2) / np.sqrt(2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def input_grid(grid: GridSpec, config: SystemConfig) -> np.ndarray:
    """Uniform grid on [-a_peak, a_peak] augmented with structural points.

    The closed-form energy-optimal locations sit exactly at +-sigma_x,
    +-a_s or the saturation input, so those are inserted when the uniform
    grid misses them; discrete solvers can then place mass on them without
    grid bias.
    """
    a = config.a_peak
    x = np.linspace(-a, a, grid.n_in)
    extras = []
    sigma_x = float(np.sqrt(config.sigma2))
    if sigma_x < a:
        extras.append(sigma_x)
    if config.hpa is not None:
        if config.hpa.a_s < a:
            extras.append(config.hpa.a_s)
        a0 = saturation_input(config.hpa, 1e-6)
        if a0 < a:
            extras.append(a0)
    tol = 1e-9 * max(1.0, a)
    for s in extras:
        for v in (s, -s):
            if np.min(np.abs(x - v)) > tol:
                x = np.sort(np.append(x, v))
    return x


def default_grid(config: SystemConfig, n_in: int = 257, m_out: int = 2001) -> GridSpec:
    """GridSpec whose gamma covers the widest conditional mean plus an
    8-sigma noise tail; n_in forced odd so 0 and +-a_peak are on-grid."""
    if n_in % 2 == 0:
        n_in += 1
    max_out = abs(config.h_i) * abs(effective_output(config.a_peak, config))
    return GridSpec(n_in=n_in, m_out=m_out, gamma=max_out + 8.0)


def build_transition_matrix(grid: GridSpec, config: SystemConfig) -> TransitionMatrix:
    """Bin the conditional output law into an m_out x n transition matrix.

    Bin masses are exact Gaussian CDF differences across bin edges, then
    each column is renormalized so truncation at +-gamma adds no bias.
    """
    max_out = abs(config.h_i) * abs(effective_output(config.a_peak, config))
    if not (grid.gamma > max_out + 6.0):
        raise ValueError(
            f"gamma={grid.gamma:g} leaves conditional mass outside the output "
            f"window; need gamma > {max_out + 6.0:g}"
        )
    x = input_grid(grid, config)
    edges = np.linspace(-grid.gamma, grid.gamma, grid.m_out + 1)
    y = 0.5 * (edges[:-1] + edges[1:])
    mu = config.h_i * np.asarray(effective_output(x, config))
    cdf = ndtr(edges[:, None] - mu[None, :])
    probs = np.diff(cdf, axis=0)
    probs = probs / probs.sum(axis=0, keepdims=True)
    for arr in (probs, x, y):
        arr.setflags(write=False)
    return TransitionMatrix(probs=probs, x_grid=x, y_grid=y)


def mi_from_matrix(probs: np.ndarray, p: np.ndarray) -> float:
    """Mutual information in bits of a column-stochastic DMC under input p."""
    p = np.asarray(p, dtype=float)
    q = np.where(probs @ p > 0, probs @ p, 1.0)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(probs > 0, probs * np.log(np.where(probs > 0, probs, 1.0) / q), 0.0)
    return float(p @ terms.sum(axis=0)) / _LOG2


@dataclass(frozen=True)
class QuadratureOptions:
    epsabs: float = 1e-10
    epsrel: float = 1e-9
    limit: int = 200
    tail: float = 8.0  # integration half-width beyond the extreme means


def mutual_information(
    dist: MassDistribution,
    config: SystemConfig,
    quad: QuadratureOptions | None = None,
) -> float:
    """MI in bits between the mass-point input and the channel output,
    by adaptive quadrature of the output differential entropy.

    I = h(Y) - h(N); h(Y) integrates -f log2 f over the mixture density f,
    truncated where every Gaussian component has decayed past `tail` sigmas.
    """
    if quad is None:
        quad = QuadratureOptions()
    mu_all = config.h_i * np.atleast_1d(
        np.asarray(effective_output(dist.locations, config))
    )
    w_all = dist.probs
    keep = w_all > 0
    mu, w = mu_all[keep], w_all[keep]
    order = np.argsort(mu)
    mu, w = mu[order], w[order]
    log_w = np.log(w)

    def neg_f_log2_f(yv: float) -> float:
        log_f = logsumexp(-0.5 * (yv - mu) ** 2 + log_w) - 0.5 * np.log(2.0 * np.pi)
        return -np.exp(log_f) * log_f / _LOG2

    half = max(abs(mu[0]), abs(mu[-1])) + quad.tail
    breaks = np.unique(np.concatenate(([-half], mu, [half])))
    h_y = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        val, _ = integrate.quad(
            neg_f_log2_f, lo, hi,
            epsabs=quad.epsabs, epsrel=quad.epsrel, limit=quad.limit,
        )
        h_y += val
    info = h_y - _H_NOISE_BITS
    return float(np.clip(info, 0.0, np.log2(len(dist.points))))


def energy_metric(dist: MassDistribution, config: SystemConfig) -> float:
    """Harvested-energy surrogate E[I0(b_rect * |h_e| * |output|)]; >= 1."""
    amps = np.abs(np.atleast_1d(np.asarray(effective_output(dist.locations, config))))
    vals = np.atleast_1d(bessel_i0(config.b_rect * abs(config.h_e) * amps))
    return float(np.dot(dist.probs, vals))


def column_energies(x, config: SystemConfig) -> np.ndarray:
    """Per-symbol energy metric values I0(b |h_e| |output(x_j)|)."""
    amps = np.abs(np.atleast_1d(np.asarray(effective_output(x, config))))
    return np.atleast_1d(bessel_i0(config.b_rect * abs(config.h_e) * amps))


def column_costs(x, config: SystemConfig) -> np.ndarray:
    """Per-symbol average-power costs (squared transmitted amplitude)."""
    u = np.atleast_1d(np.asarray(transmitted_amplitude(x, config)))
    return u * u
