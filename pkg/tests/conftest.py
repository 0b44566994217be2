import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qcorr.experiments import RunConfig, generate_split  # noqa: E402

# (criterion number, PASS/FAIL, detail) lines collected by the acceptance tests
CRITERIA_LINES: list = []


@pytest.fixture(scope="session")
def run_config():
    return RunConfig()


@pytest.fixture(scope="session")
def datasets(run_config):
    """Default-seed datasets shared by the ML, CLI and acceptance tests."""
    t0 = time.perf_counter()
    noisy_train = generate_split(run_config, "train", "poisson")
    noisy_test = generate_split(run_config, "test", "poisson")
    t1 = time.perf_counter()
    exact_train = generate_split(run_config, "train", "none")
    t2 = time.perf_counter()
    return {
        "train": noisy_train,
        "test": noisy_test,
        "exact_train": exact_train,
        "noisy_seconds": t1 - t0,
        "exact_seconds": t2 - t1,
    }


@pytest.fixture(scope="session")
def criteria_log():
    return CRITERIA_LINES


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, detail in sorted(CRITERIA_LINES):
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")
