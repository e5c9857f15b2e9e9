import math
import os

import numpy as np
import pytest

from absim.kernels import available_backends
from absim.ship import Ship

SCENARIOS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "scenarios")
DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


@pytest.fixture(params=available_backends(), ids=lambda m: m.BACKEND)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def ship():
    return Ship.default(water_depth=5.0)


def random_param_vector(rng, ship):
    """Ship vector with every hydrodynamic entry perturbed, x_G kept nonzero."""
    P = np.array(ship.vector, dtype=float)
    P *= rng.uniform(0.5, 1.5, size=P.shape)
    P[5] = rng.uniform(-3.0, 3.0) or 0.5
    return P


def scenario_path(name):
    return os.path.join(SCENARIOS, name)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when == "teardown":
        return
    key = mark.args[0]
    results = item.config._acceptance
    ok = rep.passed if rep.when == "call" else not rep.failed
    prev = results.get(key, (mark.args[1], True))
    results[key] = (prev[0], prev[1] and ok)


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_acceptance", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        title, ok = results[key]
        terminalreporter.write_line(f"criterion {key:2d} {'PASS' if ok else 'FAIL'}  {title}")
