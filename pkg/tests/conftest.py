import numpy as np
import pytest

from pairmct import from_arrays


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sample(rng, n=30, r=0.25, ties=False):
    """MCAR sample with at least two values in every block."""
    while True:
        x = rng.normal(size=(n, 2))
        if ties:
            x = np.round(x * 2) / 2
        x[rng.random((n, 2)) < r] = np.nan
        s = from_arrays(x[:, 0], x[:, 1])
        if min(s.n_c, s.n_1, s.n_2) >= 2:
            return s


@pytest.fixture
def sample(rng):
    return random_sample(rng)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
