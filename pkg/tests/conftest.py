"""Shared fixtures and the acceptance-criteria summary hook."""

from pathlib import Path

import pytest

from competrace import load_bundled_map

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

_criterion_lines: list[str] = []


def record_criterion(line: str) -> None:
    """Collect a criterion pass/fail line for the end-of-run summary."""
    _criterion_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bundled_map():
    return load_bundled_map()


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN
