import pytest

from conflictfair.core import Allocation


def labelled(*bundles):
    """Allocation from 1-based item labels, e.g. ``labelled({2, 4}, {1, 3})``."""
    return Allocation([{o - 1 for o in b} for b in bundles])


@pytest.fixture
def A():
    return labelled


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(REPORT):
            terminalreporter.write_line(line)
