import math

import numpy as np
import pytest

from nonlocality.states import pure_state, phi_minus


@pytest.fixture
def rho_phi_minus():
    return pure_state(phi_minus())


def amplitude_prob(alpha, beta, phi, ta, tb):
    """Independent oracle: |<ta, tb|psi>|^2 for alpha|HH> + e^{i phi} beta|VV>."""
    amp = alpha * math.cos(ta) * math.cos(tb) + np.exp(1j * phi) * beta * math.sin(ta) * math.sin(tb)
    return abs(amp) ** 2


def random_density_matrix(rng, n_pure=3):
    weights = rng.dirichlet(np.ones(n_pure))
    rho = np.zeros((4, 4), dtype=complex)
    for w in weights:
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        rho += w * np.outer(v, v.conj())
    return rho


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
