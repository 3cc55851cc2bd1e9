import dataclasses

import pytest
from hypothesis import settings

from coadapt import load_bundled, run_scenario

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def short(name, periods=2, **changes):
    """Bundled scenario truncated to a few periods (and optionally a shorter T)."""
    return dataclasses.replace(load_bundled(name), periods=periods, **changes)


@pytest.fixture(scope="session")
def wall_short():
    return run_scenario(short("wall_1dof", periods=3))


@pytest.fixture(scope="session")
def free_short():
    return run_scenario(short("free_space_1dof", periods=3))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(RESULTS, key=lambda k: int(k.split("-")[1])):
        terminalreporter.write_line(RESULTS[name].line())
