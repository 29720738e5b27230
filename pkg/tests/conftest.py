import numpy as np
import pytest

from mwlens import CarrierState, Grid, PhysicalContext


@pytest.fixture
def ctx():
    """Natural-unit context, negative unit charge (electron-like)."""
    return PhysicalContext.natural(charge_sign=-1, c_light=50.0)


@pytest.fixture
def ctx_pos():
    """Natural-unit context, positive unit charge."""
    return PhysicalContext.natural(charge_sign=+1, c_light=50.0)


@pytest.fixture
def carrier(ctx):
    return CarrierState.from_wavenumber(ctx, 1.0)


@pytest.fixture
def grid():
    return Grid(4096, 256.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
