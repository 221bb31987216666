import numpy as np
import pytest

from sncsampler.operators import GridConfig, build_operator_set


@pytest.fixture
def small_cfg():
    return GridConfig(M=8, W=64, M1=5, M2=3, Omega=8, Delta=16, seed=11)


@pytest.fixture
def small_ops(small_cfg):
    return build_operator_set(small_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def _report(name, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
