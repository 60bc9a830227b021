import pytest

from pixelvote.grid import build_grid, scheme


@pytest.fixture(scope="session")
def toy_table():
    return build_grid(scheme("toy"))


@pytest.fixture(scope="session")
def default_table():
    return build_grid(scheme("default"))


@pytest.fixture(scope="session")
def uniform_table():
    return build_grid(scheme("uniform"))
