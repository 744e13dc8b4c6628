import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURE_DIR = HERE / "fixtures"
FIXTURE_NAMES = ("golden_q3_N40", "original_N40", "rot13_bvar_N24", "rot25_N24")


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
