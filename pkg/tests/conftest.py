import numpy as np
import pytest

from cychern.fixtures import (
    fix_dual,
    fix_m2,
    fix_m2_even,
    fix_m2_odd,
    fix_nil,
    fix_proj,
    fix_proj_even,
    fix_pt,
    rotation_family,
)


@pytest.fixture(scope="module")
def pt():
    return fix_pt()


@pytest.fixture(scope="module")
def dual():
    return fix_dual()


@pytest.fixture(scope="module")
def nil():
    return fix_nil()


@pytest.fixture(scope="module")
def proj():
    return fix_proj()


@pytest.fixture(scope="module")
def m2():
    return fix_m2()


@pytest.fixture(scope="module")
def proj_even():
    return fix_proj_even()


@pytest.fixture(scope="module")
def m2_even():
    return fix_m2_even()


@pytest.fixture(scope="module")
def m2_odd():
    return fix_m2_odd()


@pytest.fixture(scope="module")
def rotation():
    return rotation_family()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
