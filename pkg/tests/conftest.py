import pytest
from hypothesis import HealthCheck, settings

from cmif.io import FIXTURES, load_fixture

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GENERATED = ("identity", "tent", "tent_b", "tent_flat", "bennet", "bennet_scaled", "tau_example")
FINITE_GRAPH = ("xxx", "xxxx")


@pytest.fixture(scope="session")
def fx():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_fixture(name).function
        return cache[name]

    return get


@pytest.fixture(scope="session")
def all_fixtures(fx):
    return {n: fx(n) for n in FIXTURES}
