import numpy as np
import pytest

# PASS/FAIL lines of the acceptance criteria, echoed in the terminal summary
VERDICTS: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
