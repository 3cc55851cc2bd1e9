"""Acceptance criteria at their stated tolerances, one test per criterion.

Each test prints a PASS/FAIL line; the lines are repeated in the terminal
summary so that they show up without ``-s``.
"""
import pytest

from coadapt import acceptance

RESULTS = {}


@pytest.fixture(scope="module", autouse=True)
def default_periods():
    acceptance.set_periods(None)
    yield


def _run(crit):
    result = crit()
    RESULTS[result.name] = result
    print(result.line())
    assert result.passed, result.summary


def test_ac1_dynamics_identities_and_rk4_order():
    _run(acceptance.ac1_dynamics)


def test_ac2_per_period_cost_decrement():
    _run(acceptance.ac2_decrement)


def test_ac3_force_rendering():
    _run(acceptance.ac3_force_rendering)


def test_ac4_no_contact_invariance():
    _run(acceptance.ac4_no_contact)


def test_ac5_sensorless_force_estimation():
    _run(acceptance.ac5_force_estimation)


def test_ac6_boundedness_slack():
    _run(acceptance.ac6_boundedness)


def test_ac7_no_damping_variant():
    _run(acceptance.ac7_no_damping)


def test_ac8_periodic_environment():
    _run(acceptance.ac8_periodic)


def test_ac9_determinism_and_exact_solves():
    _run(acceptance.ac9_determinism)
