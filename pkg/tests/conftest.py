import numpy as np
import pytest

from gowers_lab.arith import build_factor_table

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def table():
    """Shared sieve up to 2*10^6 (covers W n + b for the GY and W-trick checks)."""
    return build_factor_table(2 * 10**6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
