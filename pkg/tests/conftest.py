import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ciulevels import datasets
from ciulevels.models import ForestParams, SplitSpec, train_random_forest

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def titanic():
    data = datasets.load_titanic()
    model, acc = train_random_forest(data, ForestParams(seed=0), SplitSpec(seed=0))
    return data, model, acc


@pytest.fixture(scope="session")
def cars():
    data = datasets.load_cars()
    model, acc = train_random_forest(data, ForestParams(seed=0), SplitSpec(seed=0))
    return data, model, acc


@pytest.fixture(scope="session")
def small_forest():
    data = datasets.load_cars()
    model, acc = train_random_forest(data, ForestParams(n_trees=15, seed=1), SplitSpec(seed=1))
    return data, model, acc


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
