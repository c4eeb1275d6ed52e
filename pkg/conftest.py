import math

import numpy as np
import pytest

from dictionary import ActivationSpec
from function_catalog import gaussian
from maurey_sampler import MaureyConfig, Variant
from norms import box, full_space


@pytest.fixture
def gauss1():
    """Standard Gaussian exp(-x^2/2) in one dimension."""
    return gaussian(1)


@pytest.fixture
def gauss2():
    return gaussian(2)


@pytest.fixture
def activation():
    return ActivationSpec()


@pytest.fixture
def unit_box():
    return box([(-1.0, 1.0)])


@pytest.fixture
def unbounded_cfg(gauss1, activation):
    return MaureyConfig(Variant.UNBOUNDED, gauss1, full_space(1), activation, tau=1.0, ell=0, p=2.0,
                        r=2.0, u=4.5, seed=0)


@pytest.fixture
def bounded_cfg(gauss1, activation, unit_box):
    return MaureyConfig(Variant.BOUNDED, gauss1, unit_box, activation, tau=1.0, ell=0, p=2.0,
                        gamma=0.0, s=2.0, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def gauss_l2_box():
    """sqrt(int_{-1}^{1} exp(-x^2) dx)."""
    return math.sqrt(math.sqrt(math.pi) * math.erf(1.0))
