import numpy as np
import pytest

from holonomy import model, solver

_ACCEPTANCE = []


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Load (or compile) the numba kernels once so timed tests measure runtime only."""
    rho = np.zeros((model.DIM, model.DIM), dtype=complex)
    rho[model.E, model.E] = 1
    solver.integrate(rho, None, [solver.amplitude_damping(1.0)], 0.0, 0.1, monitor=solver.Monitor())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
