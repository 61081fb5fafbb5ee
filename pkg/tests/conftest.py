import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from innloops.extensions import build_C, build_Cbar, build_Gbar, build_pa64, dihedral8
from innloops.loop_core import validate_table
from innloops.modification import group64
from innloops.shared.settings import get_settings

# fixtures passed to @given tests are read-only tables, safe to share between examples
settings.register_profile("innloops", suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("innloops")

# smallest nonassociative loop
ORDER5 = [
    [0, 1, 2, 3, 4],
    [1, 0, 3, 4, 2],
    [2, 4, 0, 1, 3],
    [3, 2, 4, 0, 1],
    [4, 3, 1, 2, 0],
]


def cyclic(n):
    x = np.arange(n)
    return validate_table((x[:, None] + x[None, :]) % n, name=f"Z{n}")


@pytest.fixture(scope="session")
def loop_c():
    return build_C()


@pytest.fixture(scope="session")
def loop_cbar():
    return build_Cbar()


@pytest.fixture(scope="session")
def group_gbar():
    return build_Gbar()


@pytest.fixture(scope="session")
def loop_pa64():
    return build_pa64()


@pytest.fixture(scope="session")
def group_h0():
    return group64((0, 0, 0))


@pytest.fixture(scope="session")
def group_d8():
    return dihedral8()


@pytest.fixture
def order5():
    return validate_table(ORDER5, name="order5")


@pytest.fixture
def isolated_settings(tmp_path, monkeypatch):
    """Settings whose cache lives under tmp_path."""
    monkeypatch.setenv("INNLOOPS_CACHE_DIR", str(tmp_path / "cache"))
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()
