"""Rigid-body robot models and their operational-space dynamics.

Two models are provided: an n-dimensional point mass (identity kinematics)
and a planar two-link arm in a vertical plane. Both expose joint-space
M_q, C_q, G_q with C_q built from Christoffel symbols, so that
Mdot_q - 2 C_q is skew-symmetric. The operational-space terms are

    M = J^-T M_q J^-1
    C = J^-T (C_q - M_q J^-1 Jdot) J^-1
    G = J^-T G_q
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import IllConditioned, SingularConfiguration

GRAVITY = 9.81


class JointState(NamedTuple):
    q: np.ndarray
    qdot: np.ndarray


class TaskState(NamedTuple):
    x: np.ndarray
    xdot: np.ndarray


class DynamicsTerms(NamedTuple):
    M: np.ndarray
    C: np.ndarray
    G: np.ndarray


@dataclass(frozen=True)
class PointMass:
    """Point mass moving in R^n; joint coordinates are task coordinates."""

    n: int = 1
    mass: float = 1.0
    gravity: np.ndarray | None = None
    eps_sing: float = 1e-6

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        g = np.zeros(self.n) if self.gravity is None else np.asarray(self.gravity, float).reshape(self.n)
        object.__setattr__(self, "gravity", g)
        object.__setattr__(self, "_eye", np.eye(self.n))
        object.__setattr__(self, "_zero", np.zeros((self.n, self.n)))
        terms = DynamicsTerms(self.mass * np.eye(self.n), np.zeros((self.n, self.n)), g.copy())
        for a in terms:
            a.flags.writeable = False
        object.__setattr__(self, "_terms", terms)

    def forward_kinematics(self, q):
        return np.array(q, dtype=float)

    def jacobian(self, q, qdot):
        return self._eye.copy(), self._zero.copy()

    def joint_dynamics(self, q, qdot):
        return self.mass * self._eye, self._zero.copy(), self.gravity.copy()

    def det_jacobian(self, q):
        return 1.0

    def is_singular(self, q):
        return False

    def task_dynamics(self, q, qdot):
        return self._terms

    def task_state(self, q, qdot):
        return TaskState(q, qdot)

    def joint_accel(self, q, qdot, tau_task):
        """qddot for a task-space generalized force tau_task."""
        return (tau_task - self.gravity) / self.mass


@dataclass(frozen=True)
class TwoLinkArm:
    """Planar 2R arm in a vertical plane (gravity along -y), uniform rods by default."""

    m1: float = 1.0
    m2: float = 1.0
    l1: float = 1.0
    l2: float = 1.0
    lc1: float = 0.5
    lc2: float = 0.5
    I1: float = 1.0 / 12.0
    I2: float = 1.0 / 12.0
    g: float = GRAVITY
    eps_sing: float = 1e-6
    n: int = field(default=2, init=False)

    def forward_kinematics(self, q):
        q1, q2 = q
        return np.array([
            self.l1 * np.cos(q1) + self.l2 * np.cos(q1 + q2),
            self.l1 * np.sin(q1) + self.l2 * np.sin(q1 + q2),
        ])

    def jacobian(self, q, qdot):
        q1, q2 = q
        d1, d2 = qdot
        s1, c1 = np.sin(q1), np.cos(q1)
        s12, c12 = np.sin(q1 + q2), np.cos(q1 + q2)
        l1, l2 = self.l1, self.l2
        J = np.array([
            [-l1 * s1 - l2 * s12, -l2 * s12],
            [l1 * c1 + l2 * c12, l2 * c12],
        ])
        d12 = d1 + d2
        Jdot = np.array([
            [-l1 * c1 * d1 - l2 * c12 * d12, -l2 * c12 * d12],
            [-l1 * s1 * d1 - l2 * s12 * d12, -l2 * s12 * d12],
        ])
        return J, Jdot

    def joint_dynamics(self, q, qdot):
        q1, q2 = q
        d1, d2 = qdot
        m1, m2, l1, lc1, lc2 = self.m1, self.m2, self.l1, self.lc1, self.lc2
        c2, s2 = np.cos(q2), np.sin(q2)
        m22 = m2 * lc2**2 + self.I2
        m12 = m22 + m2 * l1 * lc2 * c2
        m11 = m1 * lc1**2 + self.I1 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * c2) + self.I2
        M = np.array([[m11, m12], [m12, m22]])
        # Christoffel form, h = dM12/dq2
        h = -m2 * l1 * lc2 * s2
        C = np.array([[h * d2, h * (d1 + d2)], [-h * d1, 0.0]])
        c1, c12 = np.cos(q1), np.cos(q1 + q2)
        G = self.g * np.array([
            (m1 * lc1 + m2 * l1) * c1 + m2 * lc2 * c12,
            m2 * lc2 * c12,
        ])
        return M, C, G

    def det_jacobian(self, q):
        return self.l1 * self.l2 * np.sin(q[1])

    def is_singular(self, q):
        return abs(self.det_jacobian(q)) < self.eps_sing

    def task_dynamics(self, q, qdot):
        return _task_terms(self, q, qdot)

    def task_state(self, q, qdot):
        J, _ = self.jacobian(q, qdot)
        return TaskState(self.forward_kinematics(q), J @ qdot)

    def joint_accel(self, q, qdot, tau_task):
        if self.is_singular(q):
            raise SingularConfiguration(f"|det J| = {abs(self.det_jacobian(q)):.3e} at q={list(q)}")
        J, _ = self.jacobian(q, qdot)
        M, C, G = self.joint_dynamics(q, qdot)
        r = J.T @ tau_task - C @ qdot - G
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        return np.array([M[1, 1] * r[0] - M[0, 1] * r[1], M[0, 0] * r[1] - M[1, 0] * r[0]]) / det


def forward_kinematics(model, q):
    return model.forward_kinematics(np.asarray(q, dtype=float))


def jacobian(model, q, qdot):
    return model.jacobian(np.asarray(q, dtype=float), np.asarray(qdot, dtype=float))


def joint_dynamics(model, q, qdot):
    return model.joint_dynamics(np.asarray(q, dtype=float), np.asarray(qdot, dtype=float))


def task_state(model, q, qdot):
    if hasattr(model, "task_state"):
        return model.task_state(q, qdot)
    J, _ = model.jacobian(q, qdot)
    return TaskState(model.forward_kinematics(q), J @ qdot)


def operational_dynamics(model, q, qdot) -> DynamicsTerms:
    """Operational-space M, C, G at (q, qdot).

    Raises SingularConfiguration when |det J| < model.eps_sing.
    """
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    if hasattr(model, "task_dynamics"):
        return model.task_dynamics(q, qdot)
    return _task_terms(model, q, qdot)


def _task_terms(model, q, qdot):
    if model.is_singular(q):
        raise SingularConfiguration(
            f"|det J| = {abs(model.det_jacobian(q)):.3e} below {model.eps_sing:g} at q={q.tolist()}"
        )
    Mq, Cq, Gq = model.joint_dynamics(q, qdot)
    J, Jdot = model.jacobian(q, qdot)
    Jinv = np.linalg.inv(J)
    JinvT = Jinv.T
    M = JinvT @ Mq @ Jinv
    M = 0.5 * (M + M.T)
    C = JinvT @ (Cq - Mq @ Jinv @ Jdot) @ Jinv
    G = JinvT @ Gq
    return DynamicsTerms(M, C, G)


def forward_accel(terms: DynamicsTerms, xdot, u, f, max_cond=1e12):
    """Solve M xddot + C xdot + G = u + f for xddot."""
    M, C, G = terms
    if M.shape[0] > 1 and np.linalg.cond(M) > max_cond:
        raise IllConditioned(f"cond(M) = {np.linalg.cond(M):.3e}")
    if M.shape[0] == 1 and M[0, 0] == 0.0:
        raise IllConditioned("M is zero")
    rhs = np.asarray(u, float) + np.asarray(f, float) - C @ np.asarray(xdot, float) - G
    return np.linalg.solve(M, rhs)


def kinetic_energy(model, q, qdot):
    Mq, _, _ = model.joint_dynamics(np.asarray(q, float), np.asarray(qdot, float))
    return 0.5 * qdot @ Mq @ qdot
