"""Scalar special functions shared by the channel, energy and solver code.

All functions accept floats or numpy arrays and broadcast elementwise.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

# Largest |x| for which I0(x) is representable in double precision
# (I0(x) ~ e^x / sqrt(2 pi x); e^713 already overflows).
_I0_OVERFLOW = 713.0


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Even in x and >= 1 everywhere.  Raises OverflowError instead of
    silently returning inf when |x| is large enough that I0(x) exceeds
    double range; use log_bessel_i0 for those regimes.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("bessel_i0 requires finite arguments")
    if np.any(np.abs(x) > _I0_OVERFLOW):
        raise OverflowError(
            f"I0 overflows double precision for |x| > {_I0_OVERFLOW:g}; "
            "use log_bessel_i0"
        )
    out = _sp.i0(x)
    return float(out) if out.ndim == 0 else out


def log_bessel_i0(x):
    """log I0(x), valid for arguments where I0 itself would overflow."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("log_bessel_i0 requires finite arguments")
    out = np.log(_sp.i0e(x)) + np.abs(x)
    return float(out) if out.ndim == 0 else out


def q_func(x):
    """Gaussian tail probability Q(x) = P(N > x) for N ~ N(0, 1).

    Saturates smoothly to 0/1 at extreme arguments; Q(x) + Q(-x) = 1.
    """
    x = np.asarray(x, dtype=float)
    out = 0.5 * _sp.erfc(x / np.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def binary_entropy(p):
    """Binary entropy H2(p) in bits, with the 0 log 0 = 0 convention."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
        raise ValueError("binary_entropy requires p in [0, 1]")
    p = np.clip(p, 0.0, 1.0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.where(p > 0, p * np.log2(p), 0.0) - np.where(
            q > 0, q * np.log2(q), 0.0
        )
    return float(out) if out.ndim == 0 else out
