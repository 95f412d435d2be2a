import numpy as np
import pytest

from emknots import geometry as geo


@pytest.fixture(scope="session")
def default_grid():
    return geo.s3_quadrature()


@pytest.fixture(scope="session")
def small_grid():
    """Cheap grid, still exact for the low-degree integrands of j <= 3/2."""
    return geo.s3_quadrature(32, 16, 32)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240810)


def random_s3_points(rng, count):
    g = rng.normal(size=(count, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return geo.S3Point(g)
