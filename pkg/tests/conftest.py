from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import edibench

settings.register_profile(
    "edibench",
    max_examples=200,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("edibench")

ROOT = Path(__file__).resolve().parent.parent

# filled by test_acceptance.py, printed at the end of the session
CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def natural_dir() -> Path:
    return ROOT / "data" / "natural"


@pytest.fixture(scope="session")
def samples_dir() -> Path:
    return Path(str(edibench.samples_dir()))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
