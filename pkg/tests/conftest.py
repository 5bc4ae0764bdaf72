import numpy as np
import pytest

from lietaut.surfaces import catalog_surface, normal_bundle


@pytest.fixture(scope="session")
def clifford16():
    return catalog_surface("clifford_torus", 16)


@pytest.fixture(scope="session")
def clifford16_bundle(clifford16):
    return normal_bundle(clifford16)


@pytest.fixture(scope="session")
def sphere16():
    return catalog_surface("round_sphere", 16, radius=np.pi / 3)


@pytest.fixture(scope="session")
def bumpy16():
    return catalog_surface("bumpy_torus", 16, amplitude=0.3)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
