import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nullcone.spacetime import WarpingModel
from nullcone.spectral import SphereGrid

settings.register_profile(
    "nullcone", max_examples=15, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("nullcone")


MODELS = {
    "minkowski": WarpingModel.minkowski(),
    "schwarzschild": WarpingModel.schwarzschild(1.0),
    "desitter": WarpingModel.de_sitter(1.0),
    "antidesitter": WarpingModel.anti_de_sitter(1.0),
}


@pytest.fixture(params=sorted(MODELS))
def model(request):
    return MODELS[request.param]


@pytest.fixture(scope="session")
def grid16():
    return SphereGrid(16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(grid, rng, max_degree=None, scale=1.0):
    deg = grid.degree
    keep = grid.mask if max_degree is None else grid.mask & (deg <= max_degree)
    return grid.from_coeffs(np.where(keep, scale * rng.standard_normal(grid.mask.shape), 0.0))
