"""Shared closed-loop runs; the full main scenario is simulated once per session."""

import pytest

from sldo.sim import main_config, run_experiment


@pytest.fixture(scope="session")
def main_runs():
    return {c: run_experiment(main_config(c)) for c in ("traditional", "bndo-flc", "sldo-flc")}


@pytest.fixture(scope="session")
def sldo_run(main_runs):
    return main_runs["sldo-flc"]


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one verdict line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].lstrip("C"))):
        terminalreporter.write_line(line)
