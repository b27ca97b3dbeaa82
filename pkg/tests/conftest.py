"""Shared pytest plumbing.

The acceptance module records one PASS/FAIL line per gate check; replaying
them in the terminal summary keeps the verdicts visible even though pytest
captures stdout of passing tests.
"""

import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_lines():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance gate")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
