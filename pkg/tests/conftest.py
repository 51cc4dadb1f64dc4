import json
import os
import sys

import numpy as np
import pytest
from hypothesis import settings as hyp_settings

from zetaladder.functionals import Settings, calibrate_cbar, fit_fourth_moment_coeffs
from zetaladder.quadrature import MomentCache
from zetaladder.zeros import build_zero_table

HERE = os.path.dirname(__file__)
sys.path.insert(0, os.path.join(HERE, "oracles"))

hyp_settings.register_profile("default", deadline=None, derandomize=True, max_examples=50)
hyp_settings.load_profile("default")

FIT_GRID = list(np.linspace(500.0, 1e4, 8))


@pytest.fixture(scope="session")
def oracle():
    with open(os.path.join(HERE, "oracles", "values.json")) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def cache():
    return MomentCache()


@pytest.fixture(scope="session")
def table():
    return build_zero_table(30000.0)


@pytest.fixture(scope="session")
def fit(cache):
    return fit_fourth_moment_coeffs(FIT_GRID, cache=cache)


@pytest.fixture(scope="session")
def st(cache, table):
    s = Settings(cache=cache, table=table)
    calibrate_cbar(1, 5000.0, s)
    return s


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
