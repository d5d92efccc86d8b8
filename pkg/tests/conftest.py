import numpy as np
import pytest
import scipy.sparse as sp

from specpoly.krylov import dense_sym_eig
from specpoly.matcore import SparseSymMatrix, SpectralInterval, gen_erdos_renyi_laplacian

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def gnp():
    return gen_erdos_renyi_laplacian(500, 0.2, 0)


@pytest.fixture(scope="session")
def gnp_eig(gnp):
    return dense_sym_eig(gnp, backend="lapack")


@pytest.fixture(scope="session")
def gnp_interval(gnp_eig):
    lam = gnp_eig[1]
    return SpectralInterval(lam[0], lam[-1])


def random_symmetric(n, seed, density=1.0):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    if density < 1.0:
        M *= rng.random((n, n)) < density
    return (M + M.T) / (2.0 * np.sqrt(n))


def diag_matrix(values):
    return SparseSymMatrix.from_scipy(sp.diags(np.asarray(values, dtype=float)).tocsr())
