import pytest
from hypothesis import HealthCheck, settings

from golden import EXAMPLE_TREE
from nbsr.treebank import read_ptb

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def example():
    return read_ptb(EXAMPLE_TREE)[0]
