import pytest
from hypothesis import HealthCheck, settings

from qstack import simulator

settings.register_profile("qstack", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qstack")

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(autouse=True, scope="session")
def checked_mode():
    # every simulated bundle asserts unit norm for the whole run
    previous = simulator.CHECK_NORMALIZATION
    simulator.CHECK_NORMALIZATION = True
    yield
    simulator.CHECK_NORMALIZATION = previous


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}")
