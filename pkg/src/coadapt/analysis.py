"""Cost functionals and Lyapunov-style diagnostics evaluated along traces.

Everything here uses privileged access to the environment truth
(F*, K_S*, K_D*), which the controller never sees. Integrals over a
period use the trapezoid rule on the N + 1 grid points of that period.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .controller import force_residual, impedance_residual, no_damping_residual, trajectory_residual
from .environment import steady_desired_position, truth_series
from .errors import NonConstantEnvironment, SingularStiffness, WindowMisaligned


def trapezoid(values, h):
    values = np.asarray(values, dtype=float)
    return h * (values.sum(axis=0) - 0.5 * (values[0] + values[-1]))


def _check_window(trace, start, stop):
    if stop - start != trace.N + 1 or start < 0 or stop > len(trace) or start % trace.N:
        raise WindowMisaligned(
            f"window [{start}, {stop}) does not cover exactly one period of N={trace.N} steps"
        )


def _quad(v, W):
    """Row-wise v_k^T W v_k."""
    return np.einsum("ki,ij,kj->k", v, W, v)


def _trace_quad(K, W):
    """Row-wise tr(K_k^T W K_k) = vec(K_k)^T (I kron W) vec(K_k)."""
    return np.einsum("kji,jl,kli->k", K, W, K)


def jc_integrand(F, KS, KD, truth, gains, damping=True):
    F_star, KS_star, KD_star = truth
    val = _quad(F_star - F, np.linalg.inv(gains.Q_F)) + _trace_quad(KS_star - KS, np.linalg.inv(gains.Q_S))
    if damping:
        val = val + _trace_quad(KD_star - KD, np.linalg.inv(gains.Q_D))
    return 0.5 * val


def _truth(trace, sl):
    return truth_series(trace.config.env, trace.t[sl])


def cost_jc_window(trace, start, stop, damping=True):
    _check_window(trace, start, stop)
    sl = slice(start, stop)
    g = jc_integrand(trace.F[sl], trace.K_S[sl], trace.K_D[sl], _truth(trace, sl), trace.config.gains, damping)
    return trapezoid(g, trace.h)


def cost_jc(trace, k):
    sl = trace.period_slice(k)
    return cost_jc_window(trace, sl.start, sl.stop)


def cost_jc_prime(trace, k):
    """Damping-free J_c used for no-damping runs."""
    sl = trace.period_slice(k)
    return cost_jc_window(trace, sl.start, sl.stop, damping=False)


def cost_je(eps, M):
    eps = np.asarray(eps, float)
    return 0.5 * float(eps @ np.asarray(M, float) @ eps)


def desired_targets(config):
    """(x_d, xi_d) for a constant environment and constant desired force."""
    if not config.F_d.is_constant:
        raise NonConstantEnvironment("desired force is time-varying; x_d has no closed form")
    F_d = config.F_d(0.0)
    x_d = steady_desired_position(config.env, F_d)
    KS_star = config.env.KS(0.0)
    return x_d, KS_star @ x_d


def cost_jr(trace, k):
    sl = trace.period_slice(k)
    _, xi_d = desired_targets(trace.config)
    d = trace.xi_r[sl] - xi_d
    return trapezoid(0.5 * _quad(d, trace.config.gains.Q_r.T), trace.h)


def cost_jr_prime(trace, k):
    """0.5 * integral of (x_r - x_d)^T K_S*^T Q_r^T (x_r - x_d); may be negative for K_S* < 0."""
    sl = trace.period_slice(k)
    x_d, _ = desired_targets(trace.config)
    W = trace.config.env.KS(0.0).T @ trace.config.gains.Q_r.T
    d = trace.x_r[sl] - x_d
    return trapezoid(0.5 * _quad(d, W), trace.h)


def jr_prime_weight_definite(config):
    W = config.env.KS(0.0).T @ config.gains.Q_r.T
    ev = np.linalg.eigvalsh(0.5 * (W + W.T))
    return bool(np.all(ev > 0) or np.all(ev < 0))


def _norms(trace, sl):
    F_star, KS_star, KD_star = _truth(trace, sl)
    fro = lambda A: np.sqrt(np.einsum("kij,kij->k", A, A))  # noqa: E731
    return dict(
        eps=np.linalg.norm(trace.eps[sl], axis=1),
        dxi=np.linalg.norm(trace.delta_xi_r[sl], axis=1),
        Ft=np.linalg.norm(F_star - trace.F[sl], axis=1),
        KSt=fro(KS_star - trace.K_S[sl]),
        KDt=fro(KD_star - trace.K_D[sl]),
        Fs=np.linalg.norm(F_star, axis=1),
        KSs=fro(KS_star),
        KDs=fro(KD_star),
    )


def sufficient_condition_margin(trace, start=0, stop=None):
    """Pointwise value of the sufficient condition for a non-increasing J.

    lambda_Gamma |eps|^2 + lambda_L |dxi|^2 + beta (|F~|^2 + |K_S~|^2 + |K_D~|^2)
        - beta (|F~||F*| + |K_S~||K_S*| + |K_D~||K_D*|)
    """
    g = trace.config.gains
    nv = _norms(trace, slice(start, stop))
    return (g.lambda_Gamma * nv["eps"] ** 2 + g.lambda_L * nv["dxi"] ** 2
            + g.beta * (nv["Ft"] ** 2 + nv["KSt"] ** 2 + nv["KDt"] ** 2)
            - g.beta * (nv["Ft"] * nv["Fs"] + nv["KSt"] * nv["KSs"] + nv["KDt"] * nv["KDs"]))


def boundedness_check(trace, start=0, stop=None):
    """Pointwise slack of the ultimate bound on eps, delta_xi_r and parameter errors."""
    g = trace.config.gains
    nv = _norms(trace, slice(start, stop))
    bound = 0.5 * g.beta * (nv["Fs"] ** 2 + nv["KSs"] ** 2 + nv["KDs"] ** 2)
    used = (g.lambda_Gamma * nv["eps"] ** 2 + g.lambda_L * nv["dxi"] ** 2
            + 0.5 * g.beta * (nv["Ft"] ** 2 + nv["KSt"] ** 2 + nv["KDt"] ** 2))
    return bound - used


def force_estimation_residual(trace, start=0, stop=None):
    """(max |w + f|, max |eps|) over the window."""
    sl = slice(start, stop)
    wf = np.linalg.norm(trace.w[sl] + trace.f[sl], axis=1)
    return float(wf.max()), float(np.linalg.norm(trace.eps[sl], axis=1).max())


@dataclass
class PeriodCosts:
    period: int
    J_c: float
    J_e: float
    J_r: float
    J: float
    delta_J: float
    rms_eps: float
    max_force_err: float
    margin_min: float
    slack_min: float
    J_c_prime: float = math.nan
    J_r_prime: float = math.nan
    jr_available: bool = True
    jr_prime_definite: bool = True

    def as_dict(self):
        return asdict(self)


def per_period_report(trace):
    """One PeriodCosts per period; delta_J is NaN for the first period."""
    cfg = trace.config
    N, P = trace.N, cfg.periods
    try:
        desired_targets(cfg)
        jr_ok = True
    except (NonConstantEnvironment, SingularStiffness):
        jr_ok = False
    definite = jr_ok and jr_prime_weight_definite(cfg)
    F_d = cfg.F_d.sample(trace.t)
    force_err = np.linalg.norm(trace.f - F_d, axis=1)
    margin = sufficient_condition_margin(trace)
    slack = boundedness_check(trace)
    out = []
    prev_J = None
    for k in range(1, P + 1):
        sl = trace.period_slice(k)
        end = k * N
        J_c = cost_jc(trace, k)
        J_e = cost_je(trace.eps[end], trace.M[end])
        J_r = cost_jr(trace, k) if jr_ok else math.nan
        J = J_c + J_e + (J_r if jr_ok else 0.0)
        body = slice((k - 1) * N, k * N)
        pc = PeriodCosts(
            period=k, J_c=J_c, J_e=J_e, J_r=J_r, J=J,
            delta_J=math.nan if prev_J is None else J - prev_J,
            rms_eps=float(np.sqrt(np.mean(np.sum(trace.eps[body] ** 2, axis=1)))),
            max_force_err=float(force_err[sl].max()),
            margin_min=float(margin[sl].min()),
            slack_min=float(slack[sl].min()),
            J_c_prime=cost_jc_prime(trace, k),
            J_r_prime=cost_jr_prime(trace, k) if jr_ok else math.nan,
            jr_available=jr_ok,
            jr_prime_definite=definite,
        )
        out.append(pc)
        prev_J = J
    return out


def delta_jc_two_ways(trace, k):
    """J_c(k) - J_c(k-1) as a difference of integrals and as an integral of differences."""
    a = cost_jc(trace, k) - cost_jc(trace, k - 1)
    cur, prev = trace.period_slice(k), trace.period_slice(k - 1)
    g = trace.config.gains
    gc = jc_integrand(trace.F[cur], trace.K_S[cur], trace.K_D[cur], _truth(trace, cur), g)
    gp = jc_integrand(trace.F[prev], trace.K_S[prev], trace.K_D[prev], _truth(trace, prev), g)
    return a, trapezoid(gc - gp, trace.h)


def update_law_residuals(trace, steps):
    """Max-abs residual of the implicit update laws at the given steps.

    The residuals are recomputed from the recorded trace (values one period
    earlier come from step s - N), so this also checks the bookkeeping of
    the delay buffer. Steps in the first period, where no law runs, give 0.
    """
    cfg, N = trace.config, trace.N
    g = cfg.gains
    out = np.zeros(len(steps))
    for i, s in enumerate(steps):
        if s < N:
            continue
        p = s - N
        eps, x, xdot = trace.eps_adapt[s], trace.x[s], trace.xdot[s]
        F_d = cfg.F_d(trace.t[s])
        if cfg.variant == "full":
            r = impedance_residual(trace.K_S[s], trace.K_D[s], trace.K_S[p], trace.K_D[p], eps, x, xdot, g)
            if trace.gate_open[s]:
                r = max(r, trajectory_residual(trace.delta_xi_r[s], trace.F[s], trace.F[p], trace.xi_r[p],
                                               eps, F_d, g))
            else:
                r = max(r, force_residual(trace.F[s], trace.F[p], eps, g))
        elif trace.gate_open[s]:
            r = no_damping_residual(trace.F[s], trace.K_S[s], trace.delta_xr[s], trace.F[p], trace.K_S[p],
                                    trace.x_r[p], eps, x, F_d, g)
        else:
            Z = np.zeros_like(trace.K_D[s])
            r = max(force_residual(trace.F[s], trace.F[p], eps, g),
                    impedance_residual(trace.K_S[s], Z, trace.K_S[p], Z, eps, x, xdot, g))
        out[i] = r
    return out
