import pytest
from hypothesis import settings, HealthCheck

from tierlang.operators import builtin_registry
from tierlang.corpus import load_corpus

# Property tests build whole programs; generation dominates runtime, so
# deadlines are off and the suppressed check is the data-too-large one.
settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def registry():
    return builtin_registry()


@pytest.fixture(scope="session")
def corpus():
    return {entry.name: entry for entry in load_corpus()}
