import pytest

from walklab.graphs import generate
from walklab.hitting import GraphAnalysis
from walklab.suite import default_families

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def suite_analyses():
    return [GraphAnalysis.of(generate(spec)) for spec in default_families()]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
