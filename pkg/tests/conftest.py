import sys

import numpy as np
import pytest

from fchange import FSeries, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_series(rng, n=40, m=17, grid=None):
    grid = grid or Grid.uniform(m)
    return FSeries(rng.standard_normal((n, grid.size)), grid)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num])
