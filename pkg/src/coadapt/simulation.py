"""Fixed-step closed-loop simulation of the robot, environment and controller."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controller import AdaptiveController, GainSet, GateConfig, InitialReference, VARIANTS
from .dynamics import JointState, task_state
from .environment import EnvironmentProfile, Periodic
from .errors import ConfigError, NonFiniteState, SingularConfiguration, SolverFailure

DIVERGENCE_BOUND = 1e6


@dataclass(frozen=True)
class ScenarioConfig:
    model: object
    env: EnvironmentProfile
    gains: GainSet
    T: float
    h: float
    periods: int
    F_d: Periodic
    reference: InitialReference
    q0: np.ndarray
    qdot0: np.ndarray
    variant: str = "full"
    gate: GateConfig = field(default_factory=GateConfig)
    name: str = "scenario"
    robot_params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "q0", np.asarray(self.q0, float).reshape(-1))
        object.__setattr__(self, "qdot0", np.asarray(self.qdot0, float).reshape(-1))
        self.validate()

    @property
    def N(self):
        return int(round(self.T / self.h))

    @property
    def n(self):
        return self.model.n

    def validate(self):
        if not (self.T > 0 and self.h > 0):
            raise ConfigError("T and h must be positive", "timing")
        N = self.T / self.h
        if abs(N - round(N)) > 1e-9 * N or round(N) < 1:
            raise ConfigError(f"not integer (T={self.T}, h={self.h})", "T/h")
        if self.periods < 2:
            raise ConfigError("must be >= 2", "timing.periods")
        if self.variant not in VARIANTS:
            raise ConfigError(f"must be one of {VARIANTS}", "controller.variant")
        n = self.n
        if self.env.n != n or self.gains.n != n or self.F_d.shape != (n,) or self.reference.n != n:
            raise ConfigError(f"dimension mismatch: robot n={n}", "scenario")
        if self.q0.shape != (n,) or self.qdot0.shape != (n,):
            raise ConfigError(f"initial state must have length {n}", "initial")
        if not np.isclose(self.env.T, self.T) or not np.isclose(self.F_d.T, self.T):
            raise ConfigError("environment and desired force must share the period T", "timing.T")


@dataclass
class Trace:
    """Per-step record of a run; ``periods`` holds the per-period report."""

    config: ScenarioConfig
    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    x_r: np.ndarray
    xr_dot: np.ndarray
    e: np.ndarray
    eps: np.ndarray
    eps_adapt: np.ndarray
    F: np.ndarray
    K_S: np.ndarray
    K_D: np.ndarray
    xi_r: np.ndarray
    delta_xi_r: np.ndarray
    delta_xr: np.ndarray
    f: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    M: np.ndarray
    gate_open: np.ndarray
    periods: list = field(default_factory=list)

    @property
    def N(self):
        return self.config.N

    @property
    def n(self):
        return self.config.n

    @property
    def h(self):
        return self.config.h

    def __len__(self):
        return len(self.t)

    def period_slice(self, k):
        """Steps of period k (1-based), endpoints included."""
        if not 1 <= k <= self.config.periods:
            raise IndexError(f"period {k} out of range 1..{self.config.periods}")
        return slice((k - 1) * self.N, k * self.N + 1)


def _joint_accel(model, env, u, t, q, qdot):
    if hasattr(model, "joint_accel"):
        x, xdot = model.task_state(q, qdot)
        return model.joint_accel(q, qdot, u + env.force(t, x, xdot))
    if model.is_singular(q):
        raise SingularConfiguration(f"|det J| = {abs(model.det_jacobian(q)):.3e} at q={q.tolist()}")
    J, _ = model.jacobian(q, qdot)
    f = env.force(t, model.forward_kinematics(q), J @ qdot)
    Mq, Cq, Gq = model.joint_dynamics(q, qdot)
    return np.linalg.solve(Mq, J.T @ (u + f) - Cq @ qdot - Gq)


def rk4_step(model, env, u, t, state: JointState, h) -> JointState:
    """Classical RK4 on (q, qdot) with u held over the step."""
    q, qd = state
    a1 = _joint_accel(model, env, u, t, q, qd)
    q2, qd2 = q + 0.5 * h * qd, qd + 0.5 * h * a1
    a2 = _joint_accel(model, env, u, t + 0.5 * h, q2, qd2)
    q3, qd3 = q + 0.5 * h * qd2, qd + 0.5 * h * a2
    a3 = _joint_accel(model, env, u, t + 0.5 * h, q3, qd3)
    q4, qd4 = q + h * qd3, qd + h * a3
    a4 = _joint_accel(model, env, u, t + h, q4, qd4)
    q_new = q + (h / 6.0) * (qd + 2 * qd2 + 2 * qd3 + qd4)
    qd_new = qd + (h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)
    if not np.isfinite(q_new.sum() + qd_new.sum()):
        raise NonFiniteState("integrator produced a non-finite state")
    return JointState(q_new, qd_new)


def make_controller(config: ScenarioConfig) -> AdaptiveController:
    return AdaptiveController(config.model, config.gains, config.T, config.h, config.F_d,
                              config.reference, config.variant, config.gate)


def run_scenario(config: ScenarioConfig, analyse=True) -> Trace:
    """Simulate P periods; returns a trace with P*N + 1 records."""
    config.validate()
    model, env, n = config.model, config.env, config.n
    S = config.periods * config.N + 1
    vec = lambda: np.zeros((S, n))  # noqa: E731
    mat = lambda: np.zeros((S, n, n))  # noqa: E731
    tr = Trace(config, t=np.arange(S) * config.h, q=vec(), qdot=vec(), x=vec(), xdot=vec(), x_r=vec(),
               xr_dot=vec(), e=vec(), eps=vec(), eps_adapt=vec(), F=vec(), K_S=mat(), K_D=mat(),
               xi_r=vec(), delta_xi_r=vec(), delta_xr=vec(), f=vec(), u=vec(), v=vec(), w=vec(),
               M=mat(), gate_open=np.zeros(S, dtype=bool))
    ctrl = make_controller(config)
    state = JointState(config.q0.copy(), config.qdot0.copy())
    h = config.h
    for s in range(S):
        t = tr.t[s]
        q, qdot = state
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qdot))) or \
                max(np.abs(q).max(), np.abs(qdot).max()) > DIVERGENCE_BOUND:
            raise NonFiniteState("robot state diverged", step=s,
                                 snapshot={"t": t, "q": q.tolist(), "qdot": qdot.tolist()})
        try:
            x, xdot = task_state(model, q, qdot)
            out = ctrl.step(s, q, qdot, x, xdot)
            if s < S - 1:
                state = rk4_step(model, env, out.u, t, state, h)
        except NonFiniteState as exc:
            if exc.step is None:
                raise NonFiniteState(str(exc), step=s, snapshot={"t": t}) from None
            raise
        except (SingularConfiguration, SolverFailure) as exc:
            exc.step = s
            exc.args = (f"step {s} (t={t:.6g}): {exc}",)
            raise
        tr.q[s], tr.qdot[s], tr.x[s], tr.xdot[s] = q, qdot, x, xdot
        tr.x_r[s], tr.xr_dot[s] = out.x_r, out.xr_dot
        tr.e[s], tr.eps[s], tr.eps_adapt[s] = out.sig.e, out.sig.eps, out.eps_adapt
        tr.F[s], tr.K_S[s], tr.K_D[s] = out.F, out.K_S, out.K_D
        tr.xi_r[s], tr.delta_xi_r[s], tr.delta_xr[s] = out.xi_r, out.delta_xi_r, out.delta_xr
        tr.f[s] = env.force(t, x, xdot)
        tr.u[s], tr.v[s], tr.w[s] = out.u, out.v, out.w
        tr.M[s] = out.terms.M
        tr.gate_open[s] = out.gate_open
    if analyse:
        from .analysis import per_period_report
        tr.periods = per_period_report(tr)
    return tr
