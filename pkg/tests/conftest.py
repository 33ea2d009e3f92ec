from pathlib import Path

import pytest

from sfwm.biphoton import FilterSpec, waveform_for_bandwidth
from sfwm.budget import RateBudget

ROOT = Path(__file__).resolve().parents[1]
REFERENCE_CONFIG = ROOT / "configs" / "reference_42C.json"

ACCEPTANCE_LINES = []


@pytest.fixture
def reference_budget():
    return RateBudget(
        pair_rate=383.0,
        noise_stokes=35e3,
        noise_antistokes=33e3,
        eta_stokes=0.21,
        eta_antistokes=0.22,
        background_stokes=200.0,
        background_antistokes=2200.0,
        window=2.916e-9,
    )


@pytest.fixture(scope="session")
def reference_waveform():
    fp = FilterSpec(896e6)
    w, _ = waveform_for_bandwidth(370e6, (fp, fp))
    return w


@pytest.fixture
def reference_config_path():
    return REFERENCE_CONFIG


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
