import warnings

import numpy as np
import pytest

from nlscatter.errors import TruncationWarning
from nlscatter.lattice import GridSpec, make_annulus_packet


def packet(grid, eps, R, center, smoothness=0.2, profile="gaussian"):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return make_annulus_packet(grid, eps, R, center, smoothness, profile)


def l2(a, b, grid):
    """Discrete L2 distance between two value arrays."""
    return float(np.sqrt(np.sum(np.abs(np.asarray(a) - np.asarray(b)) ** 2) * grid.cell))


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(1, 2048, 256.0)


@pytest.fixture(scope="session")
def small_packet(small_grid):
    return packet(small_grid, 1.0, 4.0, [2.5], 0.1)


@pytest.fixture(scope="session")
def ref_grid():
    return GridSpec(1, 4096, 200.0)


@pytest.fixture(scope="session")
def ref_packet(ref_grid):
    return packet(ref_grid, 0.5, 2.0, [1.0], 0.2)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance")
    for k in sorted(results):
        ok, detail = results[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
