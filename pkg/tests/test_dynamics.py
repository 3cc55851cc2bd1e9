import numpy as np
import pytest
from hypothesis import given, strategies as st

from coadapt.dynamics import (PointMass, TwoLinkArm, forward_accel, forward_kinematics, jacobian,
                              joint_dynamics, kinetic_energy, operational_dynamics, task_state)
from coadapt.errors import IllConditioned, SingularConfiguration

ARM = TwoLinkArm()
angle = st.floats(-np.pi, np.pi)
rate = st.floats(-3, 3)
regular_q2 = st.one_of(st.floats(0.2, np.pi - 0.2), st.floats(-np.pi + 0.2, -0.2))


def test_forward_kinematics_reference_poses():
    assert np.allclose(forward_kinematics(ARM, [0.0, 0.0]), [2.0, 0.0])
    assert np.allclose(forward_kinematics(ARM, [0.0, np.pi / 2]), [1.0, 1.0])
    assert np.allclose(forward_kinematics(ARM, [np.pi / 2, -np.pi / 2]), [1.0, 1.0])


def test_link_frame_composition():
    # elbow position plus the second link rotated by q1 + q2
    q = np.array([0.4, -1.1])
    elbow = np.array([np.cos(q[0]), np.sin(q[0])])
    tip = elbow + np.array([np.cos(q.sum()), np.sin(q.sum())])
    assert np.allclose(forward_kinematics(ARM, q), tip, atol=1e-15)


@given(angle, angle, rate, rate)
def test_jacobian_matches_finite_differences(q1, q2, d1, d2):
    q, qd = np.array([q1, q2]), np.array([d1, d2])
    J, Jdot = jacobian(ARM, q, qd)
    eps = 1e-6
    J_fd = np.column_stack([(ARM.forward_kinematics(q + eps * e) - ARM.forward_kinematics(q - eps * e)) / (2 * eps)
                            for e in np.eye(2)])
    assert np.allclose(J, J_fd, atol=1e-8)
    Jp, _ = ARM.jacobian(q + eps * qd, qd)
    Jm, _ = ARM.jacobian(q - eps * qd, qd)
    assert np.allclose(Jdot, (Jp - Jm) / (2 * eps), atol=1e-7)


@given(angle, angle, rate, rate, rate, rate)
def test_christoffel_skew_symmetry(q1, q2, d1, d2, z1, z2):
    q, qd, z = np.array([q1, q2]), np.array([d1, d2]), np.array([z1, z2])
    eps = 1e-6
    Mdot = (ARM.joint_dynamics(q + eps * qd, qd)[0] - ARM.joint_dynamics(q - eps * qd, qd)[0]) / (2 * eps)
    _, C, _ = joint_dynamics(ARM, q, qd)
    assert abs(z @ (Mdot - 2 * C) @ z) < 1e-8


@given(angle, angle, rate, rate)
def test_mass_matrix_is_kinetic_energy_hessian(q1, q2, d1, d2):
    q, qd = np.array([q1, q2]), np.array([d1, d2])
    Mq, _, _ = ARM.joint_dynamics(q, qd)
    # T is quadratic in qdot, so a second difference recovers M exactly up to rounding
    h = 1e-3
    H = np.empty((2, 2))
    for i, ei in enumerate(np.eye(2)):
        for j, ej in enumerate(np.eye(2)):
            H[i, j] = (kinetic_energy(ARM, q, qd + h * (ei + ej)) - kinetic_energy(ARM, q, qd + h * ei)
                       - kinetic_energy(ARM, q, qd + h * ej) + kinetic_energy(ARM, q, qd)) / h**2
    assert np.allclose(H, Mq, atol=1e-6)
    assert np.all(np.linalg.eigvalsh(Mq) > 0)


@given(angle, regular_q2, rate, rate)
def test_kinetic_energy_same_in_task_space(q1, q2, d1, d2):
    q, qd = np.array([q1, q2]), np.array([d1, d2])
    xdot = task_state(ARM, q, qd).xdot
    M = operational_dynamics(ARM, q, qd).M
    assert abs(kinetic_energy(ARM, q, qd) - 0.5 * xdot @ M @ xdot) < 1e-9


@given(angle, regular_q2, rate, rate, rate, rate)
def test_task_space_skew_symmetry(q1, q2, d1, d2, z1, z2):
    q, qd, z = np.array([q1, q2]), np.array([d1, d2]), np.array([z1, z2])
    eps = 1e-6
    Mp = operational_dynamics(ARM, q + eps * qd, qd).M
    Mm = operational_dynamics(ARM, q - eps * qd, qd).M
    C = operational_dynamics(ARM, q, qd).C
    scale = max(1.0, np.abs(Mp).max())
    assert abs(z @ ((Mp - Mm) / (2 * eps) - 2 * C) @ z) < 1e-6 * scale


@given(angle, regular_q2, rate, rate, rate, rate)
def test_task_and_joint_accelerations_agree(q1, q2, d1, d2, f1, f2):
    q, qd, u = np.array([q1, q2]), np.array([d1, d2]), np.array([f1, f2])
    Mq, Cq, Gq = ARM.joint_dynamics(q, qd)
    J, Jdot = ARM.jacobian(q, qd)
    qdd = np.linalg.solve(Mq, J.T @ u - Cq @ qd - Gq)
    xdd = forward_accel(operational_dynamics(ARM, q, qd), J @ qd, u, np.zeros(2))
    assert np.allclose(xdd, J @ qdd + Jdot @ qd, atol=1e-7 * max(1.0, np.abs(xdd).max()))
    assert np.allclose(ARM.joint_accel(q, qd, u), qdd, atol=1e-9 * max(1.0, np.abs(qdd).max()))


def test_gravity_hanging_and_horizontal():
    _, _, G = ARM.joint_dynamics(np.array([-np.pi / 2, 0.0]), np.zeros(2))
    assert np.allclose(G, 0.0, atol=1e-12)
    _, _, G = ARM.joint_dynamics(np.array([0.0, 0.0]), np.zeros(2))
    # (m1 lc1 + m2 l1 + m2 lc2) g and m2 lc2 g
    assert np.allclose(G, [2.0 * 9.81, 0.5 * 9.81])


def test_singular_configuration_raises():
    with pytest.raises(SingularConfiguration):
        operational_dynamics(ARM, [0.3, 0.0], [0.0, 0.0])
    with pytest.raises(SingularConfiguration):
        ARM.joint_accel(np.array([0.3, 1e-9]), np.zeros(2), np.zeros(2))


def test_point_mass_terms():
    pm = PointMass(n=2, mass=3.0, gravity=[0.0, 9.81])
    M, C, G = operational_dynamics(pm, [0.1, 0.2], [1.0, 0.0])
    assert np.array_equal(M, 3.0 * np.eye(2))
    assert np.array_equal(C, np.zeros((2, 2)))
    assert np.array_equal(G, [0.0, 9.81])
    assert np.allclose(pm.joint_accel(np.zeros(2), np.zeros(2), np.array([3.0, 9.81])), [1.0, 0.0])
    with pytest.raises(ValueError):
        PointMass(mass=0.0)


def test_forward_accel_rejects_degenerate_inertia():
    from coadapt.dynamics import DynamicsTerms
    bad = DynamicsTerms(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]]), np.zeros((2, 2)), np.zeros(2))
    with pytest.raises(IllConditioned):
        forward_accel(bad, np.zeros(2), np.ones(2), np.zeros(2))
