"""Shared fixtures plus the end-of-run acceptance summary printer."""

import pytest

from propopt.data import generate
from propopt.space import DesignSpaceConfig

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def small_dataset():
    cfg = DesignSpaceConfig(rng_seed=2024)
    return generate(cfg, target_count=300, efficiency_floor=0.5)


@pytest.fixture(scope="session")
def acceptance_lines():
    """Sink for one PASS/FAIL line per acceptance check."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)
