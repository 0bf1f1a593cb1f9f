"""Shared pytest plumbing: surface acceptance verdict lines in the summary."""

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log() -> list:
    """Sink for 'ACCEPTANCE <k> ...' verdict lines, echoed after the run."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
