import pytest

from fasalab import BurstSpec
from fasalab.engine import run_paired


@pytest.fixture(scope="session")
def burst_500_paired():
    """100 seed-paired single-burst replications at N = 500, all schemes."""
    schemes = {"ideal": {}, "fasa": {"nu": 2, "eta": 1}, "pb-aloha": {}, "qplus": {}}
    return run_paired(BurstSpec(500), schemes, 100, seed=1)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
