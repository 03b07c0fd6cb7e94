import numpy as np
import pytest

from aggmem import database
from aggmem.schemas import BetaSpec, DiracSpec, GenericSpec, PolynomialSpec, UniformSpec


@pytest.fixture
def beta23():
    return BetaSpec(p=2, q=3)


@pytest.fixture
def uniform():
    return UniformSpec()


@pytest.fixture
def hump():
    """Polynomial density 6x(1-x): short memory, persistence 2/3"""
    return PolynomialSpec(c=[0.0, 6.0, -6.0])


@pytest.fixture
def dirac05():
    return DiracSpec(phi0=0.5)


@pytest.fixture
def generic_hump():
    return GenericSpec(density=lambda x: 6.0 * np.asarray(x) * (1.0 - np.asarray(x)), label="6x(1-x)")


@pytest.fixture(params=["beta23", "uniform", "hump", "dirac05", "generic_hump"])
def family(request):
    """One spec per family"""
    return request.getfixturevalue(request.param)


@pytest.fixture
def ledger(monkeypatch):
    """In-memory run ledger; the engine is shared by every session in the test"""
    database.reset_engine()
    monkeypatch.setenv("AGGMEM_DATABASE_URL", "sqlite://")
    database.init_db()
    db = database.get_session_local()()
    yield db
    db.close()
    database.reset_engine()
