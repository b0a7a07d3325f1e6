import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def fixture_path(name):
    return Path(str(resources.files("sfcover") / "data" / name))


@pytest.fixture
def walkthrough_path():
    return fixture_path("walkthrough_k3.json")


@pytest.fixture
def annulus_path():
    return fixture_path("annulus_k3.json")


@pytest.fixture
def quadrants_path():
    return fixture_path("quadrants_3435.json")


# Acceptance verdicts, printed in the terminal summary so they survive output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
