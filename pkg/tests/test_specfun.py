import numpy as np
import pytest

from swipt_hpa.specfun import bessel_i0, binary_entropy, log_bessel_i0, q_func


def test_bessel_known_values():
    assert bessel_i0(0.0) == 1.0
    # reference values from 50-digit series evaluation
    assert abs(bessel_i0(1.0) - 1.2660658777520083) < 1e-14
    assert abs(bessel_i0(2.5) - 3.2898391440501230) < 1e-13


def test_bessel_even_and_monotone(rng):
    x = rng.uniform(0.0, 100.0, 10000)
    assert np.array_equal(bessel_i0(x), bessel_i0(-x))
    xs = np.sort(x)
    vals = bessel_i0(xs)
    assert np.all(np.diff(vals) >= 0)
    assert np.all(vals >= 1.0)


def test_bessel_overflow_guard():
    with pytest.raises(OverflowError):
        bessel_i0(720.0)
    with pytest.raises(ValueError):
        bessel_i0(np.inf)
    with pytest.raises(ValueError):
        bessel_i0(np.nan)


def test_log_bessel_matches_direct_log(rng):
    x = rng.uniform(0.0, 50.0, 1000)
    assert np.max(np.abs(log_bessel_i0(x) - np.log(bessel_i0(x)))) < 1e-12


def test_log_bessel_large_argument():
    # log I0(x) -> x - 0.5*log(2 pi x) + O(1/x)
    x = 1000.0
    asym = x - 0.5 * np.log(2.0 * np.pi * x)
    val = log_bessel_i0(x)
    assert np.isfinite(val)
    assert abs(val - asym) < 1e-3 * abs(asym)


def test_q_func_known_values():
    assert q_func(0.0) == 0.5
    assert abs(q_func(1.0) - 0.15865525393145705) < 1e-16


def test_q_func_complement(rng):
    x = rng.normal(0.0, 3.0, 10000)
    assert np.max(np.abs(q_func(x) + q_func(-x) - 1.0)) < 1e-15


def test_q_func_extremes():
    assert q_func(40.0) < 1e-300
    assert q_func(-40.0) == 1.0


def test_binary_entropy_values():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert abs(binary_entropy(0.11) - 0.4999159581645280) < 1e-15


def test_binary_entropy_symmetry(rng):
    p = rng.uniform(0.0, 1.0, 10000)
    assert np.max(np.abs(binary_entropy(p) - binary_entropy(1.0 - p))) < 1e-15


def test_binary_entropy_domain():
    with pytest.raises(ValueError):
        binary_entropy(-0.01)
    with pytest.raises(ValueError):
        binary_entropy(1.01)
