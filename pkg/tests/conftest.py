from __future__ import annotations

import pytest
from hypothesis import settings

from kgconc.characteristics import make_scale
from kgconc.nonlinearity import linear_nonlinearity, logarithmic_nonlinearity
from kgconc.trajectory import ConstantBeta, TanhBeta

settings.register_profile("kgconc", database=None, max_examples=10, deadline=None)
settings.load_profile("kgconc")


@pytest.fixture(scope="session")
def log_nl():
    return logarithmic_nonlinearity()


@pytest.fixture(scope="session")
def lin_nl():
    return linear_nonlinearity()


@pytest.fixture(scope="session")
def tanh_traj():
    return TanhBeta(0.4, 0.1)


@pytest.fixture(scope="session")
def const_traj():
    return ConstantBeta(0.5)


@pytest.fixture(scope="session")
def scale_1e2():
    return make_scale(1e-2)
