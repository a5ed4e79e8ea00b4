import pytest

import meroslice as M


@pytest.fixture(scope="session", autouse=True)
def warm():
    # numba kernels compile on first call; keep that out of timed assertions
    M.warmup()


@pytest.fixture(scope="session")
def rho23():
    return complex(2.0 / 3.0)


@pytest.fixture(scope="session")
def model23(rho23):
    return M.find_model_parameter(rho23)


# oracle-verified constants (30-digit Newton on the family formula)
FIXED_POINT_22 = 2.2581608512744483 + 2.1231290359664983j
POLE0_22 = 1.0277184660433278 - 1.1327673014958j
ORDER2_CENTER_K1 = 0.9670147930553765 + 2.2169914216039266j
