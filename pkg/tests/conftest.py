import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stabent.dynamics import random_doped_circuit
from stabent.oracle import extract_stabilizer_group, simulate_dense
from stabent.tableau import Bipartition

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_cut(n, rng):
    k = int(rng.integers(1, n)) if n > 1 else 0
    return Bipartition(sorted(int(q) for q in rng.choice(n, k, replace=False)), n)


def all_cuts(n):
    for m in range(1, 2 ** (n - 1)):
        yield Bipartition([q for q in range(n) if m >> q & 1], n)


def doped_instance(n, t, rng, labels=("T",)):
    """Dense state of a random doped circuit and its exact stabilizer group."""
    c = random_doped_circuit(n, t, rng, labels=labels)
    psi = simulate_dense(c, rng)
    return c, psi, extract_stabilizer_group(psi)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines collected by tests/test_acceptance.py, echoed in the summary
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
