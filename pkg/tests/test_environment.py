import numpy as np
import pytest
from hypothesis import given, strategies as st

from coadapt.environment import (EnvironmentProfile, Periodic, environment_truth, interaction_force,
                                 steady_desired_position, truth_series)
from coadapt.errors import NonConstantEnvironment, SingularStiffness


def test_periodic_constant_and_harmonics():
    p = Periodic(np.array([1.0]), 2.0, cos=[np.array([0.5])], sin=[0.0, np.array([0.25])])
    assert p.shape == (1,)
    assert not p.is_constant
    assert np.allclose(p(0.0), [1.5])
    assert np.allclose(p(0.5), [1.0 + 0.5 * np.cos(np.pi / 2) + 0.25 * np.sin(np.pi)])
    assert np.allclose(p(2.0 + 0.3), p(0.3))
    assert Periodic.constant([2.0, 3.0]).is_constant


def test_too_many_harmonics_rejected():
    with pytest.raises(ValueError):
        Periodic(np.zeros(1), 1.0, cos=[np.ones(1)] * 6)


@given(st.floats(0, 20))
def test_sample_matches_pointwise_and_derivative(t):
    p = Periodic(np.array([[-100.0]]), 2.0, cos=[np.array([[-20.0]])], sin=[np.array([[3.0]])])
    assert np.allclose(p.sample(np.array([t]))[0], p(t))
    h = 1e-6
    assert np.allclose(p.derivative(t), (p(t + h) - p(t - h)) / (2 * h), atol=1e-4)


def test_interaction_force_oracle():
    env = EnvironmentProfile.constant(2.0, [1.0], [[-100.0]], [[-2.0]], [0.01])
    # 1 - 100 (0.05 - 0.01) - 2 * 0.5
    assert np.allclose(interaction_force(env, 0.3, [0.05], [0.5]), [1.0 - 4.0 - 1.0])
    F_star, KS, KD = environment_truth(env, 0.0)
    assert np.allclose(F_star, [2.0])
    assert np.allclose(KS, [[-100.0]]) and np.allclose(KD, [[-2.0]])


def test_time_varying_force_matches_truth_form():
    T = 2.0
    env = EnvironmentProfile(T, Periodic(np.array([0.5]), T, sin=[np.array([1.0])]),
                             Periodic(np.array([[-100.0]]), T, cos=[np.array([[-20.0]])]),
                             Periodic.constant([[-2.0]], T), Periodic(np.array([0.02]), T, cos=[np.array([0.01])]))
    t = np.linspace(0, 4, 9)
    F_star, KS, KD = truth_series(env, t)
    for k, tk in enumerate(t):
        x, xd = np.array([0.03]), np.array([-0.1])
        f = interaction_force(env, tk, x, xd)
        assert np.allclose(f, F_star[k] + KS[k] @ x + KD[k] @ xd)


def test_steady_desired_position():
    env = EnvironmentProfile.constant(2.0, [0.0], [[-100.0]], [[-2.0]], [0.0])
    assert np.allclose(steady_desired_position(env, [-5.0]), [0.05])
    with pytest.raises(SingularStiffness):
        steady_desired_position(EnvironmentProfile.free_space(1, 2.0), [0.0])
    varying = EnvironmentProfile(2.0, env.F0, Periodic(np.array([[-100.0]]), 2.0, cos=[np.array([[-20.0]])]),
                                 env.KD, env.x0)
    with pytest.raises(NonConstantEnvironment):
        steady_desired_position(varying, [-5.0])


def test_free_space_is_zero():
    env = EnvironmentProfile.free_space(2, 1.0)
    assert np.array_equal(interaction_force(env, 0.7, [1.0, 2.0], [3.0, 4.0]), np.zeros(2))
