import numpy as np
import pytest

from contactqm.verification import random_hermitian, random_point  # noqa: F401


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_tangent(m, rng, dS=True):
    from contactqm.geometry import TangentVector
    return TangentVector(rng.normal(size=m) + 1j * rng.normal(size=m), float(rng.normal()) if dS else 0.0)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
