import pytest

from gaplimits.arith import build_store


@pytest.fixture(scope="session")
def store_1e6():
    return build_store(10**6)


@pytest.fixture(scope="session")
def store_1e5():
    return build_store(10**5)


@pytest.fixture(scope="session")
def store_small():
    return build_store(10**4)
