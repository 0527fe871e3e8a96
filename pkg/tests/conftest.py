"""Shared fixtures: expensive profile/spectrum solves are session-scoped."""

import pytest

from twosol.groundstate import solve_ground_state
from twosol.params import ModelParams
from twosol.spectrum import solve_linearized_spectrum


@pytest.fixture(scope="session")
def params113():
    return ModelParams(N=1, p=3.0, alpha=1.0)


@pytest.fixture(scope="session")
def profile113(params113):
    return solve_ground_state(params113)


@pytest.fixture(scope="session")
def spectral113(profile113):
    return solve_linearized_spectrum(profile113)


@pytest.fixture(scope="session")
def params_a5():
    # heavier damping slows the instability (nu+ ~ 0.29), which is what
    # makes long-horizon persistence resolvable in double precision
    return ModelParams(N=1, p=3.0, alpha=5.0)


@pytest.fixture(scope="session")
def profile_a5(params_a5):
    return solve_ground_state(params_a5)


@pytest.fixture(scope="session")
def spectral_a5(profile_a5):
    return solve_linearized_spectrum(profile_a5)


@pytest.fixture(scope="session")
def profile115():
    return solve_ground_state(ModelParams(N=1, p=5.0, alpha=1.0))


@pytest.fixture(scope="session")
def profile313():
    return solve_ground_state(ModelParams(N=3, p=3.0, alpha=1.0))
