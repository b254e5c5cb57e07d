import math

import pytest

from circdens import quantum

# acceptance results collected by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def p606():
    return quantum.fermi_momentum(606)


@pytest.fixture(scope="session")
def lam606():
    return quantum.smooth_fermi_energy(606)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def relative(a, b):
    return abs(a - b) / abs(b) if b else math.inf
