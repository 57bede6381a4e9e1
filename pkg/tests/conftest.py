import pytest

from sensorcontract.model import REFERENCE

_ACCEPTANCE_LINES = []


@pytest.fixture
def ref():
    return REFERENCE


@pytest.fixture
def report_line():
    """Record a one-line PASS/FAIL verdict shown in the terminal summary."""

    def record(criterion, ok, detail):
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
