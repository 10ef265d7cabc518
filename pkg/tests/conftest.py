import numpy as np
import pytest

from mobiuseig.pencil import Pencil
from mobiuseig.sparse_core import SparseMatrix
from mobiuseig.synth import PlantSpec, planted_pencil

REFERENCE_SIGMA = 4.8334
UNSTABLE = (0.1814 + 4.8323j, 0.1814 - 4.8323j, 0.0233, 0.0004)


def dense_pencil(J, l_diag):
    return Pencil(SparseMatrix.from_dense(np.asarray(J, dtype=float)), l_diag)


def random_pencil(rng, n, m, density=0.3):
    """Random real pencil with a well-conditioned diagonal-dominant J4 block."""
    N = n + m
    J = rng.standard_normal((N, N)) * (rng.random((N, N)) < density)
    J[np.diag_indices(N)] += rng.uniform(1, 2, N) * rng.choice([-1, 1], N)
    l_diag = np.zeros(N)
    state = rng.permutation(N)[:n]
    l_diag[state] = rng.choice([1.0, 2.0, 0.5], n)
    alg = np.setdiff1d(np.arange(N), state)
    J[np.ix_(alg, alg)] += np.diag(np.abs(J[np.ix_(alg, alg)]).sum(axis=1) + 1.0)
    return dense_pencil(J, l_diag)


@pytest.fixture
def diag_pencil():
    """J = diag(2, 1), L = diag(1, 0): single finite eigenvalue 2."""
    return dense_pencil([[2.0, 0.0], [0.0, 1.0]], [1.0, 0.0])


@pytest.fixture(scope="session")
def planted_case():
    """Default 60+40 planted pencil carrying the four unstable values."""
    return planted_pencil(PlantSpec(seed=0))


@pytest.fixture(scope="session")
def small_case():
    return planted_pencil(PlantSpec(n_states=12, m_algebraic=8, density=0.25, seed=3, n_large_negative=1))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
