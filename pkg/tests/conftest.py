import numpy as np
import pytest

from tabuport.instance import Instance, random_instance


@pytest.fixture
def toy():
    """Two assets: means (0.001, 0.002), std devs (0.01, 0.02), correlation 0.5."""
    corr = np.array([[1.0, 0.5], [0.5, 1.0]])
    return Instance.from_correlation([0.001, 0.002], [0.01, 0.02], corr, name="toy")


@pytest.fixture
def small():
    return random_instance(5, np.random.default_rng(7), name="small5")


@pytest.fixture
def medium():
    return random_instance(12, np.random.default_rng(11), name="medium12")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
