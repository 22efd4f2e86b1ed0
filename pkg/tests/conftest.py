import os

import numpy as np
import pytest

LONG_RUN = os.environ.get("AVPREC_LONG_RUN", "").strip() not in ("", "0")


def pytest_collection_modifyitems(config, items):
    if LONG_RUN:
        return
    skip = pytest.mark.skip(reason="full-scale run; set AVPREC_LONG_RUN=1")
    for item in items:
        if "longrun" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rs():
    return np.random.default_rng(1234)


def random_indefinite(rs, n, p):
    """Random symmetric matrix with ``p`` negative eigenvalues bounded away from zero."""
    Q, _ = np.linalg.qr(rs.standard_normal((n, n)))
    d = rs.uniform(0.5, 3.0, n)
    d[:p] *= -1
    return (Q * d) @ Q.T


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Record one acceptance line: ``record(criterion, ok, detail)``."""

    def _record(criterion, ok, detail):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
