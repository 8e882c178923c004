import numpy as np
import pytest

from driftslice import HexRegion, SystemConstants

_REPORT = []


def record(criterion: str, passed: bool, detail: str = "") -> str:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    _REPORT.append(line)
    print(line)
    return line


@pytest.fixture
def report():
    return record


@pytest.fixture(scope="session")
def constants():
    return SystemConstants()


@pytest.fixture(scope="session")
def region(constants):
    return HexRegion(side=constants.r_0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
