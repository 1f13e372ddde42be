import pytest

from selfsim.config import load_bundled
from selfsim.pipeline import Pipeline

BUNDLED = ["cantor-1-3", "lebesgue-1-2", "golden-bernoulli",
           "golden-gasket-conjugated", "complex-pisot-demo", "commensurable-osc"]

_pipelines: dict = {}


def get_pipeline(name: str) -> Pipeline:
    """Session-shared pipelines; the gasket build is expensive."""
    if name not in _pipelines:
        _pipelines[name] = Pipeline(load_bundled(name))
    return _pipelines[name]


@pytest.fixture
def pipelines():
    return get_pipeline


@pytest.fixture
def cantor():
    return get_pipeline("cantor-1-3")


@pytest.fixture
def lebesgue():
    return get_pipeline("lebesgue-1-2")


@pytest.fixture
def golden():
    return get_pipeline("golden-bernoulli")


@pytest.fixture
def gasket():
    return get_pipeline("golden-gasket-conjugated")


@pytest.fixture
def dragon():
    return get_pipeline("complex-pisot-demo")


@pytest.fixture
def commensurable():
    return get_pipeline("commensurable-osc")
