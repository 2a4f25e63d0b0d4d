import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oversmooth.graph import generate, parse_generator  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def karate():
    return generate(parse_generator("karate"))


@pytest.fixture(scope="session")
def path3():
    return generate(parse_generator("path:3"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
