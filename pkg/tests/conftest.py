import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from titest import (
    build_bsc_model,
    build_coin_model,
    build_constant_model,
    build_identity_model,
)


@pytest.fixture(scope="session")
def coin10():
    return build_coin_model(10, 0.4)


@pytest.fixture(scope="session")
def coin35():
    return build_coin_model(35, 0.4)


@pytest.fixture(scope="session")
def bsc25():
    return build_bsc_model(0.25)


@pytest.fixture(scope="session")
def identity4():
    return build_identity_model(4)


@pytest.fixture(scope="session")
def constant2():
    return build_constant_model(2)
