import time

import pytest

from eitcorr.scenarios import correlation_vs_field, default_config

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def default_sweep():
    """Full default correlate sweep (41 points x 1e5 samples) and its wall time."""
    t0 = time.perf_counter()
    res = correlation_vs_field(default_config())
    return res, time.perf_counter() - t0


@pytest.fixture(scope="session")
def half_power_sweep():
    return correlation_vs_field(default_config().with_power_scale(0.5))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("abc")), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>3s}: {'PASS' if ok else 'FAIL'}  {detail}")
