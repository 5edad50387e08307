import pytest

from htwk import spec_to_model
from htwk.verify import CASE_B, DEFAULT_MODEL, K_DIVERGENT, LIGHT_CONTROL


@pytest.fixture(scope="session")
def default_model():
    """Heavy positive tail, infinite-mean negative part."""
    return spec_to_model(DEFAULT_MODEL)


@pytest.fixture(scope="session")
def light_model():
    """Exponential both sides: the negative control."""
    return spec_to_model(LIGHT_CONTROL)


@pytest.fixture(scope="session")
def k_divergent_model():
    return spec_to_model(K_DIVERGENT)


@pytest.fixture(scope="session")
def case_b_model():
    return spec_to_model(CASE_B)
