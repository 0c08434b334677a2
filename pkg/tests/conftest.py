import numpy as np
import pytest

from weights import WeightSpec

# Desk-scale defaults for every spec family the suite exercises.
CONSTANT = WeightSpec.constant()
ONCE = WeightSpec.once_reinforced(0.5)
POWER = WeightSpec.power_law(0.5, 0.2)
POWER_REPEL = WeightSpec.power_law(1.0, 0.3)
TABLE = WeightSpec.tabulated([2.0, 1.5, 1.2])


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run acceptance-scale statistical tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[CONSTANT, ONCE, POWER, TABLE], ids=lambda s: s.label())
def any_spec(request):
    return request.param
