import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qslbound.ensembles import random_hamiltonian, random_state, random_unitary

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)
alphas = st.floats(min_value=0.02, max_value=0.98)


def state_from(seed, d):
    return random_state(np.random.default_rng(seed), d)


def pair_from(seed, d):
    rng = np.random.default_rng(seed)
    return random_state(rng, d), random_state(rng, d)


def orbit_from(seed, d):
    rng = np.random.default_rng(seed)
    return random_state(rng, d), random_unitary(rng, d)


def drive_from(seed, d, tau):
    rng = np.random.default_rng(seed)
    return random_state(rng, d), random_hamiltonian(rng, d, tau)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record_criterion(number: int, title: str, passed: bool, detail: str):
    ACCEPTANCE_LINES[number] = f"criterion {number} {'PASS' if passed else 'FAIL'}  {title}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
