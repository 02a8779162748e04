import numpy as np
import pytest

from kink_spectra.birman_schwinger import ReducedResolvent
from kink_spectra.corrector import ChannelBasis
from kink_spectra.gamma import gauss_family
from kink_spectra.models import phi4, potential_well, sine_gordon
from kink_spectra.operator1d import Grid1D

# the 2D grid used by most corrector / BS tests
GX = Grid1D(10.0, 201)
GY = Grid1D(8.0, 161)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running cross-checks")


@pytest.fixture(scope="session")
def phi4_basis():
    return ChannelBasis.build(phi4(), GX, GY, 1)


@pytest.fixture(scope="session")
def sg_basis():
    return ChannelBasis.build(sine_gordon(), GX, GY, 0)


@pytest.fixture(scope="session")
def well_basis():
    # 4 - 2 sech^2 x: one bound state at 3, continuum from 4, no open channels
    return ChannelBasis.build(potential_well(4.0, 2.0), GX, GY, 0)


@pytest.fixture(scope="session")
def x_gauss():
    return gauss_family("x-gauss")


@pytest.fixture(scope="session")
def phi4_rr(phi4_basis, x_gauss):
    return ReducedResolvent(phi4_basis, x_gauss.on_grid(GX.nodes, GY.nodes))


@pytest.fixture(scope="session")
def well_gamma():
    return gauss_family("x-gauss", amplitude=2.0, x0=1.0, alpha_y=0.25)


@pytest.fixture(scope="session")
def well_rr(well_basis, well_gamma):
    return ReducedResolvent(well_basis, well_gamma.on_grid(GX.nodes, GY.nodes))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
