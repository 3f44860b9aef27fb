import numpy as np
import pytest

from arcgas.arcs import make_circular_arc, make_interval, make_perturbed_arc
from arcgas.energies import analyze_arc


@pytest.fixture(scope="session")
def interval_an():
    return analyze_arc(make_interval(), N=64)


@pytest.fixture(scope="session")
def half_circle_an():
    return analyze_arc(make_circular_arc(np.pi / 2), N=64)


@pytest.fixture(scope="session")
def perturbed_an():
    return analyze_arc(make_perturbed_arc((1.0,), 0.3), N=64)


@pytest.fixture(scope="session", params=["interval", "half_circle", "perturbed"])
def any_an(request, interval_an, half_circle_an, perturbed_an):
    return {"interval": interval_an, "half_circle": half_circle_an,
            "perturbed": perturbed_an}[request.param]


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
