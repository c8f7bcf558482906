import numpy as np
import pytest

from apcgl import ApSeries, CglParams

_ACCEPTANCE = []


def random_series(rng, M, lam=1.0, decay=0.5, scale=1.0):
    raw = rng.normal(size=M) + 1j * rng.normal(size=M)
    return ApSeries(lam, scale * raw * decay ** np.arange(1, M + 1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def standard_params():
    return CglParams(alpha=1.0, beta=1.0, gamma=0.1, a=1.0, b=1.0, degree=3,
                     kappa=-(1 + 1j))


@pytest.fixture
def standard_u0():
    return ApSeries.from_modes(1.0, 32, {1: 0.5, 2: 0.25j})


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""
    def record(label, passed, detail):
        _ACCEPTANCE.append((label, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")
