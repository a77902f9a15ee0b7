import numpy as np
import pytest
import structlog

from nonlocality_service.qstate import basis_density, ghz_density, maximally_mixed
from nonlocality_service.svetlichny import MeasurementSettings

X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])


@pytest.fixture(autouse=True)
def _reset_structlog():
    """Drop logging config bound to a per-test capture stream (e.g. by cli.main)"""
    yield
    structlog.reset_defaults()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ghz():
    return ghz_density()


@pytest.fixture
def zero_state():
    return basis_density(0)


@pytest.fixture
def mixed():
    return maximally_mixed()


@pytest.fixture
def xy_settings():
    """a, b, c, d along x and a', b', c', d' along y"""
    return MeasurementSettings(X, Y, X, Y, X, Y, X, Y)


def random_unit(rng, size=None):
    shape = (3,) if size is None else (size, 3)
    v = rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_settings(rng) -> MeasurementSettings:
    return MeasurementSettings(*random_unit(rng, 8))
