import pytest

from src.core.params import SystemParams, make_params
from src.states.pointer import PointerFamily, make_family, robust_alpha


@pytest.fixture
def params() -> SystemParams:
    return make_params(1.0, 1.0)


@pytest.fixture
def robust(params: SystemParams) -> PointerFamily:
    return robust_alpha(params)


@pytest.fixture
def symmetric(params: SystemParams) -> PointerFamily:
    """alpha = 2: coherent states, C_1/4 = diag(1/2, 1/2)."""
    return make_family(2.0, params)
