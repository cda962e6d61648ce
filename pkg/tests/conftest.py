import pytest

from pltvsar.datasets.panel import ModelSpec
from pltvsar.datasets.weights import SpatialWeights
from tests.helpers import random_panel, ring_weights


@pytest.fixture
def ring4():
    return SpatialWeights(ring_weights(4), standardized=True)


@pytest.fixture
def small_panel():
    """N=4, T=3 with an intercept and one covariate."""
    return random_panel(4, 3, p=2, seed=11)


@pytest.fixture
def small_spec():
    return ModelSpec(varying_cols=(0,), constant_cols=(1,))
