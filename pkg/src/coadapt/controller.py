"""Adaptive force, impedance and reference-trajectory controller.

The control input is u = v + w with

    v = M xddot_e + C xdot_e + G - Gamma eps
    w = -F - K_S x - K_D xdot

and F, K_S, K_D, xi_r, x_r learned by period-delay laws of the form
q(t) = q(t - T) + (correction evaluated at t). Every law that places the
time-t unknown on both sides is solved exactly (small linear or, for the
no-damping variant, bilinear systems) rather than lagged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .buffers import PeriodBuffer
from .dynamics import DynamicsTerms, operational_dynamics
from .environment import Periodic
from .errors import ConfigError, NonFiniteState, SolverFailure

VARIANTS = ("full", "no-damping")
GATE_MODES = ("simultaneous", "after-k-periods", "epsilon-threshold")


def _as_matrix(value, n, name):
    a = np.asarray(value, dtype=float)
    if a.ndim == 0:
        return float(a) * np.eye(n)
    if a.ndim == 1:
        if a.shape != (n,):
            raise ConfigError(f"expected {n} diagonal entries, got {a.shape[0]}", name)
        return np.diag(a)
    if a.shape != (n, n):
        raise ConfigError(f"expected a {n}x{n} matrix, got shape {a.shape}", name)
    return a


def _check_spd(M, name, symmetric=True):
    if not np.all(np.isfinite(M)):
        raise ConfigError("non-finite entries", name)
    if symmetric and not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ConfigError("not symmetric", name)
    sym = 0.5 * (M + M.T)
    if np.linalg.eigvalsh(sym).min() <= 0:
        raise ConfigError("not positive definite", name)


@dataclass(frozen=True)
class GainSet:
    """Controller gains with positivity checked at construction.

    Matrix gains accept a scalar (times identity), a diagonal, or a full matrix.
    ``kappa`` is both the threshold on sigma_min(K_D) selecting the ODE
    branch of ``integrate_reference`` and the damping of its
    least-squares fallback.
    """

    n: int
    alpha: float
    Gamma: np.ndarray
    Q_F: np.ndarray
    Q_S: np.ndarray
    Q_D: np.ndarray
    Q_r: np.ndarray
    L: np.ndarray
    beta: float = 1e-3
    kappa: float = 1e-4

    def __post_init__(self):
        n = self.n
        for name in ("Gamma", "Q_F", "Q_S", "Q_D", "Q_r", "L"):
            object.__setattr__(self, name, _as_matrix(getattr(self, name), n, f"gains.{name}"))
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigError("must be > 0", "gains.alpha")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ConfigError("must be >= 0", "gains.beta")
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise ConfigError("must be > 0", "gains.kappa")
        for name in ("Gamma", "Q_F", "Q_S", "Q_D", "Q_r"):
            _check_spd(getattr(self, name), f"gains.{name}")
        _check_spd(self.L, "gains.L", symmetric=False)

    @cached_property
    def lambda_Gamma(self):
        return float(np.linalg.eigvalsh(self.Gamma).min())

    @cached_property
    def lambda_L(self):
        return float(np.linalg.eigvalsh(0.5 * (self.L + self.L.T)).min())

    @cached_property
    def P(self):
        """L^-T Q_r, the trajectory-law gain."""
        return np.linalg.solve(self.L.T, self.Q_r)

    @cached_property
    def A_F(self):
        return np.linalg.inv(np.eye(self.n) + self.beta * self.Q_F)

    @cached_property
    def A_S(self):
        return np.linalg.inv(np.eye(self.n) + self.beta * self.Q_S)

    @cached_property
    def A_D(self):
        return np.linalg.inv(np.eye(self.n) + self.beta * self.Q_D)

    @cached_property
    def coupled_matrix(self):
        """Block matrix of the joint (F, delta_xi_r) solve."""
        n, I = self.n, np.eye(self.n)
        A = np.zeros((2 * n, 2 * n))
        A[:n, :n] = self.P
        A[:n, n:] = I + self.P
        A[n:, :n] = I + self.beta * self.Q_F
        A[n:, n:] = -self.Q_F @ self.Q_r.T
        return A

    @cached_property
    def coupled_inverse(self):
        A = self.coupled_matrix
        if np.linalg.cond(A) > 1e12:
            raise SolverFailure("coupled force/trajectory system is singular")
        return np.linalg.inv(A)

    def replace(self, **changes):
        kw = {k: getattr(self, k) for k in ("n", "alpha", "Gamma", "Q_F", "Q_S", "Q_D", "Q_r", "L", "beta", "kappa")}
        kw.update(changes)
        return GainSet(**kw)


class TrackingSignals(NamedTuple):
    e: np.ndarray
    edot: np.ndarray
    eps: np.ndarray
    xdot_e: np.ndarray
    xddot_e: np.ndarray


def tracking_signals(x, xdot, x_r, xr_dot, xr_ddot, alpha) -> TrackingSignals:
    e = x - x_r
    edot = xdot - xr_dot
    return TrackingSignals(e, edot, edot + alpha * e, xr_dot - alpha * e, xr_ddot - alpha * edot)


def feedback_control_v(terms: DynamicsTerms, sig: TrackingSignals, Gamma):
    M, C, G = terms
    return M @ sig.xddot_e + C @ sig.xdot_e + G - Gamma @ sig.eps


def feedforward_control_w(state, x, xdot):
    return -state.F - state.K_S @ x - state.K_D @ xdot


def adapt_impedance(eps, x, xdot, KS_prev, KD_prev, gains: GainSet):
    """Implicit stiffness/damping laws solved for the time-t values."""
    KS = gains.A_S @ (KS_prev + gains.Q_S @ np.outer(eps, x))
    KD = gains.A_D @ (KD_prev + gains.Q_D @ np.outer(eps, xdot))
    return KS, KD


def adapt_force(eps, F_prev, gains: GainSet):
    """Feedforward-force law without the trajectory coupling term."""
    return gains.A_F @ (F_prev + gains.Q_F @ eps)


def adapt_trajectory_and_force(eps, F_d, F_prev, xi_prev, gains: GainSet):
    """Jointly solve for (delta_xi_r, F(t)); returns (delta_xi_r, F, xi_r)."""
    n = gains.n
    rhs = np.concatenate([gains.P @ (F_d - xi_prev), F_prev + gains.Q_F @ eps])
    z = gains.coupled_inverse @ rhs
    F, dxi = z[:n], z[n:]
    return dxi, F, xi_prev + dxi


def _sigma_min(A):
    if A.shape == (1, 1):
        return abs(A[0, 0])
    return np.linalg.svd(A, compute_uv=False)[-1]


def _solve(A, b):
    if A.shape == (1, 1):
        return b / A[0, 0]
    return np.linalg.solve(A, b)


def integrate_reference(delta_xi, KS, KD, dxr_prev, h, kappa):
    """Advance K_S dx + K_D d(dx)/dt = delta_xi by one step.

    Returns (delta_xr, delta_xr_dot). With sigma_min(K_D) >= kappa the
    relation is stepped by backward Euler (stiffness term implicit).
    Otherwise delta_xr is the damped least-squares solution
    (K_S^T K_S + kappa^2 I)^-1 K_S^T delta_xi and its rate is a backward
    difference.
    """
    n = len(delta_xi)
    if _sigma_min(KD) >= kappa:
        A = KD + h * KS
        if _sigma_min(A) > 1e-12 * max(1.0, np.abs(A).max()):
            dxr = _solve(A, KD @ dxr_prev + h * delta_xi)
            return dxr, (dxr - dxr_prev) / h
    dxr = _solve(KS.T @ KS + kappa**2 * np.eye(n), KS.T @ delta_xi)
    return dxr, (dxr - dxr_prev) / h


def _no_damping_terms(d, eps, x, F_prev, KS_prev, xr_prev, gains):
    xr = xr_prev + d
    F = gains.A_F @ (F_prev + gains.Q_F @ (eps + gains.Q_r.T @ d))
    KS = gains.A_S @ (KS_prev + gains.Q_S @ (np.outer(eps, x) + np.outer(gains.Q_r.T @ d, xr)))
    return xr, F, KS


def _newton_starts(n):
    yield np.zeros(n)
    for scale in (1.0, 3.0, 10.0, 30.0):
        for i in range(n):
            for sign in (-1.0, 1.0):
                d = np.zeros(n)
                d[i] = sign * scale
                yield d


def adapt_no_damping(eps, x, F_d, F_prev, KS_prev, xr_prev, gains: GainSet, tol=1e-14, max_iter=80):
    """Solve the damping-free coupled laws for (F(t), K_S(t), delta_xr).

    The stiffness law carries the outer product Q_r^T delta_xr x_r(t)^T,
    which makes the system cubic in delta_xr. It is solved by Newton's
    method with backtracking, restarted from a few fixed points if the
    iteration stalls in a local minimum of the residual norm.
    """
    n = gains.n
    I = np.eye(n)
    dF = gains.A_F @ gains.Q_F @ gains.Q_r.T
    SQ = gains.A_S @ gains.Q_S @ gains.Q_r.T

    def residual(d):
        xr, F, KS = _no_damping_terms(d, eps, x, F_prev, KS_prev, xr_prev, gains)
        return d - gains.P @ (F_d - F - KS @ xr), xr, KS

    for d in _newton_starts(n):
        R, xr, KS = residual(d)
        for _ in range(max_iter):
            Jac = I + gains.P @ (dF + KS + SQ @ ((xr @ xr) * I + np.outer(d, xr)))
            try:
                step = np.linalg.solve(Jac, R)
            except np.linalg.LinAlgError:
                break
            if np.abs(step).max() <= tol * max(1.0, np.abs(d).max()):
                d = d - step
                _, F, KS = _no_damping_terms(d, eps, x, F_prev, KS_prev, xr_prev, gains)
                return F, KS, d
            norm, lam = np.linalg.norm(R), 1.0
            while lam > 1e-6:
                R_new, xr_new, KS_new = residual(d - lam * step)
                if np.linalg.norm(R_new) < norm or norm == 0.0:
                    break
                lam *= 0.5
            else:
                break
            d = d - lam * step
            R, xr, KS = R_new, xr_new, KS_new
    raise SolverFailure("no-damping Newton iteration did not converge")


# residuals of the defining relations, used by diagnostics and tests

def impedance_residual(KS, KD, KS_prev, KD_prev, eps, x, xdot, gains):
    r1 = KS - KS_prev - gains.Q_S @ (np.outer(eps, x) - gains.beta * KS)
    r2 = KD - KD_prev - gains.Q_D @ (np.outer(eps, xdot) - gains.beta * KD)
    return max(np.abs(r1).max(), np.abs(r2).max())


def trajectory_residual(dxi, F, F_prev, xi_prev, eps, F_d, gains):
    r1 = dxi - gains.P @ (F_d - F - xi_prev - dxi)
    r2 = F - F_prev - gains.Q_F @ (eps - gains.beta * F + gains.Q_r.T @ dxi)
    return max(np.abs(r1).max(), np.abs(r2).max())


def force_residual(F, F_prev, eps, gains):
    return np.abs(F - F_prev - gains.Q_F @ (eps - gains.beta * F)).max()


def no_damping_residual(F, KS, dxr, F_prev, KS_prev, xr_prev, eps, x, F_d, gains):
    xr = xr_prev + dxr
    r1 = dxr - gains.P @ (F_d - F - KS @ xr)
    r2 = F - F_prev - gains.Q_F @ (eps - gains.beta * F + gains.Q_r.T @ dxr)
    r3 = KS - KS_prev - gains.Q_S @ (np.outer(eps, x) - gains.beta * KS + np.outer(gains.Q_r.T @ dxr, xr))
    return max(np.abs(r1).max(), np.abs(r2).max(), np.abs(r3).max())


@dataclass(frozen=True)
class InitialReference:
    """Reference used during the first period: constant, line or Fourier."""

    kind: str
    value: Periodic | None = None
    offset: np.ndarray | None = None
    slope: np.ndarray | None = None

    @classmethod
    def constant(cls, value, T=1.0):
        return cls("constant", value=Periodic.constant(value, T))

    @classmethod
    def fourier(cls, periodic: Periodic):
        return cls("fourier", value=periodic)

    @classmethod
    def line(cls, offset, slope):
        return cls("line", offset=np.asarray(offset, float), slope=np.asarray(slope, float))

    @property
    def n(self):
        return (self.value.shape if self.value is not None else self.offset.shape)[0]

    def __call__(self, t):
        """(x_r, xr_dot, xr_ddot) at time t."""
        if self.kind == "line":
            return self.offset + self.slope * t, self.slope.copy(), np.zeros_like(self.slope)
        p = self.value
        if p.is_constant:
            z = np.zeros_like(p.mean)
            return p.mean.copy(), z, z.copy()
        w = 2.0 * np.pi / p.T
        phase = w * np.fmod(t, p.T)
        dd = np.zeros_like(p.mean)
        for k, c in enumerate(p.cos, start=1):
            dd -= (k * w) ** 2 * c * np.cos(k * phase)
        for k, s in enumerate(p.sin, start=1):
            dd -= (k * w) ** 2 * s * np.sin(k * phase)
        return p(t), p.derivative(t), dd


@dataclass(frozen=True)
class GateConfig:
    """When trajectory adaptation is allowed to run.

    ``after-k-periods`` opens once ``k`` periods have elapsed;
    ``epsilon-threshold`` opens (and latches) once the RMS tracking error
    over the previous period drops below ``threshold``.
    """

    mode: str = "simultaneous"
    k: int = 1
    threshold: float = 1e-2

    def __post_init__(self):
        if self.mode not in GATE_MODES:
            raise ConfigError(f"unknown gate mode {self.mode!r}; expected one of {GATE_MODES}", "controller.gate.mode")
        if self.k < 1:
            raise ConfigError("must be >= 1", "controller.gate.k")
        if not self.threshold > 0:
            raise ConfigError("must be > 0", "controller.gate.threshold")


class ControlOutput(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    sig: TrackingSignals
    terms: DynamicsTerms
    F: np.ndarray
    K_S: np.ndarray
    K_D: np.ndarray
    xi_r: np.ndarray
    delta_xi_r: np.ndarray
    x_r: np.ndarray
    xr_dot: np.ndarray
    xr_ddot: np.ndarray
    delta_xr: np.ndarray
    eps_adapt: np.ndarray
    gate_open: bool


@dataclass
class AdaptiveState:
    F: np.ndarray
    K_S: np.ndarray
    K_D: np.ndarray


@dataclass
class AdaptiveController:
    """Step-wise controller; call ``step`` once per grid step in order."""

    model: object
    gains: GainSet
    T: float
    h: float
    F_d: Periodic
    reference: InitialReference
    variant: str = "full"
    gate: GateConfig = field(default_factory=GateConfig)
    divergence_bound: float = 1e6

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}", "controller.variant")
        N = int(round(self.T / self.h))
        if N < 1 or abs(N * self.h - self.T) > 1e-9 * self.T:
            raise ConfigError("not integer", "T/h")
        self.N = N
        n = self.model.n
        self.n = n
        self.buffer = PeriodBuffer(N, self.h, {
            "F": (n,), "K_S": (n, n), "K_D": (n, n), "xi_r": (n,),
            "x_r": (n,), "xr_dot": (n,), "xr_ddot": (n,),
        })
        self._dxr_last = np.zeros(n)
        self._dxr_dot_last = np.zeros(n)
        self._eps_sq = 0.0
        self._eps_sq_prev = np.inf
        self.gate_open = False
        self._next_step = 0

    def _update_gate(self, period):
        g = self.gate
        if g.mode == "simultaneous":
            self.gate_open = True
        elif g.mode == "after-k-periods":
            self.gate_open = period >= g.k
        elif not self.gate_open:
            rms = np.sqrt(self._eps_sq_prev / self.N)
            self.gate_open = bool(rms < g.threshold)

    def step(self, s, q, qdot, x, xdot) -> ControlOutput:
        if s != self._next_step:
            raise RuntimeError(f"controller expected step {self._next_step}, got {s}")
        self._next_step += 1
        gains, n, h = self.gains, self.n, self.h
        t = s * h
        period, phase = divmod(s, self.N)
        F_d = self.F_d(t)
        zero = np.zeros(n)

        if phase == 0 and s > 0:
            self._eps_sq_prev, self._eps_sq = self._eps_sq, 0.0
            self._update_gate(period)

        if period == 0:
            Z = np.zeros((n, n))
            F, KS, KD = zero.copy(), Z, Z.copy()
            x_r, xr_dot, xr_ddot = self.reference(t)
            xi_r = KS @ x_r + KD @ xr_dot
            dxi = dxr = dxr_dot = eps_a = zero
        else:
            F_p, KS_p, KD_p, xi_p, xr_p, xrd_p, xrdd_p = self.buffer.delayed_many(
                s, ("F", "K_S", "K_D", "xi_r", "x_r", "xr_dot", "xr_ddot"))
            # reference extrapolated by the latest increment; x_r(t) is still unknown here
            eps_a = tracking_signals(x, xdot, xr_p + self._dxr_last, xrd_p + self._dxr_dot_last,
                                     xrdd_p, gains.alpha).eps
            if self.variant == "full":
                KS, KD = adapt_impedance(eps_a, x, xdot, KS_p, KD_p, gains)
                if self.gate_open:
                    dxi, F, xi_r = adapt_trajectory_and_force(eps_a, F_d, F_p, xi_p, gains)
                    dxr, dxr_dot = integrate_reference(dxi, KS, KD, self._dxr_last, h, gains.kappa)
                else:
                    F = adapt_force(eps_a, F_p, gains)
                    dxi, xi_r, dxr, dxr_dot = zero, xi_p, zero, zero
            else:
                KD = np.zeros((n, n))
                if self.gate_open:
                    F, KS, dxr = adapt_no_damping(eps_a, x, F_d, F_p, KS_p, xr_p, gains)
                    dxr_dot = (dxr - self._dxr_last) / h
                else:
                    KS, _ = adapt_impedance(eps_a, x, xdot, KS_p, KD, gains)
                    F = adapt_force(eps_a, F_p, gains)
                    dxr, dxr_dot = zero, zero
            x_r = xr_p + dxr
            xr_dot = xrd_p + dxr_dot
            xr_ddot = xrdd_p + (dxr_dot - self._dxr_dot_last) / h
            if self.variant == "no-damping":
                xi_r = KS @ x_r
                dxi = xi_r - xi_p
        self._dxr_last, self._dxr_dot_last = dxr, dxr_dot

        sig = tracking_signals(x, xdot, x_r, xr_dot, xr_ddot, gains.alpha)
        terms = operational_dynamics(self.model, q, qdot)
        v = feedback_control_v(terms, sig, gains.Gamma)
        w = -F - KS @ x - KD @ xdot
        u = v + w
        self._eps_sq += float(sig.eps @ sig.eps)

        watched = (("u", u), ("F", F), ("K_S", KS), ("K_D", KD), ("x_r", x_r), ("xr_dot", xr_dot),
                   ("xr_ddot", xr_ddot), ("xi_r", xi_r))
        # NaN fails the comparison, so one reduction covers both checks
        if not np.abs(np.concatenate([val.ravel() for _, val in watched])).max() <= self.divergence_bound:
            for name, val in watched:
                if not np.abs(val).max() <= self.divergence_bound:
                    raise NonFiniteState(
                        f"controller quantity {name} diverged (max |{name}| = {np.abs(val).max():.3e})",
                        step=s, snapshot={"t": t, name: val.tolist(), "gains": _gain_summary(gains)},
                    )
        self.buffer.write(s, F=F, K_S=KS, K_D=KD, xi_r=xi_r, x_r=x_r, xr_dot=xr_dot, xr_ddot=xr_ddot)
        return ControlOutput(u, v, w, sig, terms, F, KS, KD, xi_r, dxi, x_r, xr_dot, xr_ddot, dxr,
                             eps_a, self.gate_open)


def _gain_summary(gains: GainSet):
    return {k: np.asarray(getattr(gains, k)).tolist()
            for k in ("alpha", "Gamma", "Q_F", "Q_S", "Q_D", "Q_r", "L", "beta", "kappa")}
