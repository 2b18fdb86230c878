import numpy as np
import pytest

from lancom.sparse import SparseMatrixCSR, gen_random_symmetric


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    return 0.5 * (M + M.T)


def laplacian_1d(n):
    main = np.full(n, 2.0)
    off = np.full(n - 1, -1.0)
    rows = np.concatenate([np.arange(n), np.arange(n - 1), np.arange(1, n)])
    cols = np.concatenate([np.arange(n), np.arange(1, n), np.arange(n - 1)])
    return SparseMatrixCSR.from_coo(n, rows, cols, np.concatenate([main, off, off]))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def sparse200():
    return gen_random_symmetric(200, 8, seed=2)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
