import math

import pytest

from sfmink.spaceform import SpaceForm


@pytest.fixture(scope="session")
def H2():
    return SpaceForm(-1, 2)


@pytest.fixture(scope="session")
def E2():
    return SpaceForm(0, 2)


@pytest.fixture(scope="session")
def S2():
    return SpaceForm(1, 2)


@pytest.fixture(scope="session")
def H3():
    return SpaceForm(-1, 3)


PI_4 = math.pi / 4
