import numpy as np
import pytest

from weinstein import WeinsteinParams

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


@pytest.fixture
def params():
    return WeinsteinParams(1.0, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split("[")[0]), k)):
        ok, detail = ACCEPTANCE[key]
        tr.write_line(f"AC{key:<12} {'PASS' if ok else 'FAIL'}  {detail}")
