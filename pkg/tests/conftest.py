import numpy as np
import pytest

from aquanet.config import default_config
from aquanet.data import StandardsTable, generate_synthetic


@pytest.fixture(scope="session")
def standards():
    return StandardsTable.from_config(default_config())


@pytest.fixture(scope="session")
def small_dataset(standards):
    return generate_synthetic(150, 3, standards)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, _, line in sorted(results):
        terminalreporter.write_line(line)
    passed = sum(ok for _, ok, _, _ in results)
    terminalreporter.write_line(f"{passed}/{len(results)} criteria passed")
