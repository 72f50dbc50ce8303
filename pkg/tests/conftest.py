import pytest
from hypothesis import settings

# reproducible property runs: fixed example order, no on-disk example cache
settings.register_profile("repro", derandomize=True, database=None, deadline=None)
settings.load_profile("repro")

_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line, then assert."""

    def check(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
