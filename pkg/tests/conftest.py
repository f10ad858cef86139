import sys
import os

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

# criterion name -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def record(name, passed, detail="", status=None):
    status = status or ("PASS" if passed else "FAIL")
    ACCEPTANCE[name] = (status, detail)
    print(f"[{status}] {name}: {detail}")


def _order(name):
    tag = name.split()[0]
    digits = "".join(ch for ch in tag if ch.isdigit())
    return int(digits), tag


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=_order):
        status, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{status}  {name}  {detail}")
