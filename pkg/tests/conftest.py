import numpy as np
import pytest

from riemcom import ModelSpace

# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def record():
    """``record(key, ok, detail)`` stores the verdict line for one criterion."""
    def _record(key, ok, detail):
        ACCEPTANCE[key] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
    return _record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[1.0, 0.0, -1.0], ids=["sphere", "flat", "hyperbolic"])
def kappa(request):
    return request.param


@pytest.fixture
def plane(kappa):
    return ModelSpace(kappa, 2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key:>2}: {detail}")
