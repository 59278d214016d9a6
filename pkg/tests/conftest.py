import numpy as np
import pytest

from heckelab.config import load_extension
from heckelab.numfield import field_from_spec


@pytest.fixture(scope="session")
def Q():
    return field_from_spec("Q")


@pytest.fixture(scope="session")
def K5():
    """Q(√-5), class number 2."""
    return field_from_spec("Q(sqrt -5)")


@pytest.fixture(scope="session")
def R10():
    return field_from_spec("Q(sqrt 10)")


@pytest.fixture(scope="session")
def ext_cfg():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_extension(name)
        return cache[name]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.line(n))
