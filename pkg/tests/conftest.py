import time

import numpy as np
import pytest

from soliton_lab.grids import FrequencyGrid, SpatialGrid
from soliton_lab.pipeline import default_spec, simulate, write_run


@pytest.fixture(scope="session")
def grid():
    return SpatialGrid(40.0, 4096)


@pytest.fixture(scope="session")
def freq():
    return FrequencyGrid(12.0, 2048)


@pytest.fixture(scope="session")
def default_result():
    """The default pipeline run (eps = 0.01, t <= 50, N = 4096); about a minute."""
    start = time.perf_counter()
    result = simulate(default_spec())
    result.wall_seconds = time.perf_counter() - start
    return result


@pytest.fixture(scope="session")
def default_run_dir(default_result, tmp_path_factory):
    out = tmp_path_factory.mktemp("default_run")
    write_run(default_result, out)
    return out


def dressed_gaussian(x, seed):
    """Even J-invariant field: a Gaussian times a random even polynomial with complex coefficients."""
    rng = np.random.default_rng(seed)
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    u = np.exp(-x * x / 4) * (c[0] + c[1] * x**2 / 4 + c[2] * x**4 / 32)
    return np.stack([u, np.conj(u)])


def l2(field, grid):
    return float(np.sqrt(grid.integrate(np.sum(np.abs(field) ** 2, axis=0))))


# One line per acceptance criterion, collected by tests/test_acceptance.py and
# printed after the run so it shows up even when output is captured.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
