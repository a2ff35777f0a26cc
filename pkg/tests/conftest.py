import math

import pytest

from pseudolap import ManifoldModel


@pytest.fixture(scope="session")
def sphere():
    return ManifoldModel.sphere3()


@pytest.fixture(scope="session")
def cube():
    return ManifoldModel.unit_torus(3)


@pytest.fixture(scope="session")
def square():
    return ManifoldModel.unit_torus(2)


@pytest.fixture(scope="session")
def all_models(sphere, cube, square):
    return {"sphere3": sphere, "torus3": cube, "torus2": square}


PI = math.pi
