import numpy as np
import pytest

ACCEPTANCE = {}


def record_acceptance(number: int, name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (name, bool(passed), detail)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number} {name}: {detail}")
