"""Shared fixtures: datasets and small reusable objects.

Expensive experiment runs used by the acceptance suite are module-scoped
fixtures inside ``test_acceptance.py`` so that running any single unit-test
file stays fast.
"""

from __future__ import annotations

import numpy as np
import pytest

from proxgossip.models import load_wdbc


@pytest.fixture(scope="session")
def wdbc():
    """The bundled 569 x 30 diagnostic dataset, standardized."""
    return load_wdbc()


@pytest.fixture(scope="session")
def wdbc_with_report():
    return load_wdbc(report=True)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


# One line per acceptance criterion, printed after the run regardless of
# output capturing.  test_acceptance.py appends (number, title, ok, detail).
ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"criterion {num:2d} [{title}] {status}  {detail}")
