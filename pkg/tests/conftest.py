import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nhoqbm import (SpectralModel, Temperature, coefficients, solve_fundamental,  # noqa: E402
                    tabulate_kernels)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")


@pytest.fixture(scope="session")
def weak_bath():
    """Ohmic, gamma = 0.05, exponential cutoff at 2."""
    return SpectralModel.ohmic(0.05, 2.0)


@pytest.fixture(scope="session")
def warm_kernels(weak_bath):
    return tabulate_kernels(weak_bath, Temperature.finite(1.0), 6.0, 240)


@pytest.fixture(scope="session")
def series_factory(weak_bath, warm_kernels):
    cache = {}

    def make(n_osc, n_scaling="com_reduced"):
        key = (n_osc, n_scaling)
        if key not in cache:
            fund = solve_fundamental(weak_bath, n_osc, t_max=6.0, n_steps=240,
                                     n_scaling=n_scaling, eta=warm_kernels.eta)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                cache[key] = (fund, coefficients(fund, warm_kernels))
        return cache[key]

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
