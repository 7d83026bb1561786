"""Shared fixtures plus the acceptance-criteria summary block."""

import numpy as np
import pytest

# (criterion number, passed, detail) tuples recorded by test_acceptance.py
ACCEPTANCE_RECORDS = []


def record_criterion(number, passed, detail):
    ACCEPTANCE_RECORDS.append((number, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RECORDS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RECORDS):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
