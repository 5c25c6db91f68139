import numpy as np
import pytest

from swipt_hpa.channel import SystemConfig
from swipt_hpa.hpa import HpaParams


@pytest.fixture
def rng():
    return np.random.default_rng(20250811)


@pytest.fixture
def bpsk_config():
    """Narrowband link where the equiprobable two-point law is optimal."""
    return SystemConfig(
        h_i=1.0, h_e=1.0, b_rect=0.5, sigma2=1000.0, a_peak=1.75,
        hpa=HpaParams(a_s=5.0, beta=1.0),
    )


@pytest.fixture
def wide_config():
    """Wide peak range with the amplifier well into compression."""
    return SystemConfig(
        h_i=1.0, h_e=1.0, b_rect=0.5, sigma2=1000.0, a_peak=10.0,
        hpa=HpaParams(a_s=5.0, beta=1.0),
    )
