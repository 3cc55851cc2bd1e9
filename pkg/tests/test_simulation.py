import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coadapt import PointMass, run_scenario
from coadapt.dynamics import JointState
from coadapt.environment import EnvironmentProfile
from coadapt.errors import ConfigError, NonFiniteState
from coadapt.simulation import rk4_step
from conftest import short


def test_rk4_exact_on_constant_force():
    st_ = rk4_step(PointMass(), EnvironmentProfile.free_space(1, 1.0), np.array([1.0]), 0.0,
                   JointState(np.zeros(1), np.zeros(1)), 0.01)
    assert st_.q[0] == pytest.approx(5e-5, rel=1e-12)
    assert st_.qdot[0] == pytest.approx(1e-2, rel=1e-12)


@given(st.floats(0.001, 0.05))
def test_rk4_spring_step_matches_taylor_polynomial(h):
    # x'' = -x: one RK4 step reproduces the 4th-order Taylor polynomial of cos
    env = EnvironmentProfile.constant(1.0, [0.0], [[-1.0]], [[0.0]], [0.0])
    st_ = rk4_step(PointMass(), env, np.zeros(1), 0.0, JointState(np.ones(1), np.zeros(1)), h)
    assert st_.q[0] == pytest.approx(1 - h**2 / 2 + h**4 / 24, abs=1e-15)
    assert st_.qdot[0] == pytest.approx(-h + h**3 / 6, abs=1e-15)


def test_config_validation():
    cfg = short("wall_1dof")
    with pytest.raises(ConfigError, match="T/h"):
        dataclasses.replace(cfg, h=0.0003)
    with pytest.raises(ConfigError, match="periods"):
        dataclasses.replace(cfg, periods=1)
    with pytest.raises(ConfigError, match="initial"):
        dataclasses.replace(cfg, q0=np.zeros(2))
    assert cfg.N == 2000


def test_trace_shape(wall_short):
    tr = wall_short
    assert len(tr) == 3 * 2000 + 1
    assert tr.K_S.shape == (6001, 1, 1)
    assert tr.period_slice(2) == slice(2000, 4001)
    assert len(tr.periods) == 3
    with pytest.raises(IndexError):
        tr.period_slice(4)


def test_runs_are_bit_identical(wall_short):
    again = run_scenario(short("wall_1dof", periods=3), analyse=False)
    for name in ("x", "xdot", "u", "F", "K_S", "K_D", "x_r"):
        assert np.array_equal(getattr(wall_short, name), getattr(again, name))


def test_first_period_runs_with_zero_estimates(wall_short):
    sl = slice(0, 2000)
    assert not wall_short.F[sl].any() and not wall_short.K_S[sl].any()
    assert wall_short.F[2000:].any()


def test_free_space_stays_put(free_short):
    assert np.all(free_short.x == 0.1)
    assert not free_short.w.any()


def test_divergence_is_reported_with_step():
    cfg = short("wall_1dof")
    bad = dataclasses.replace(cfg, gains=cfg.gains.replace(Q_F=1e9, kappa=1e-4))
    with pytest.raises(NonFiniteState) as info:
        run_scenario(bad)
    assert info.value.step is not None and info.value.step >= cfg.N
    assert "step" in str(info.value)


def test_two_link_closed_loop_runs():
    tr = run_scenario(short("wall_2link", periods=2))
    assert np.all(np.isfinite(tr.x)) and tr.x.shape == (4001, 2)
