import pytest

from relsosc.model import ModelParams


@pytest.fixture
def supercritical():
    return ModelParams(0.5, 1.0)


@pytest.fixture
def subcritical():
    return ModelParams(0.5, 0.1)


@pytest.fixture
def critical():
    return ModelParams.critical(0.5)


@pytest.fixture(params=[(0.5, 0.1), (0.5, 0.5), (0.5, 1.0)], ids=["sub", "crit", "super"])
def any_regime(request):
    return ModelParams(*request.param)
