"""Static SVG diagnostics for a finished trace.

Output is byte-for-byte deterministic: the SVG hash salt is pinned and no
date metadata is written.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis import desired_targets  # noqa: E402
from .errors import NonConstantEnvironment, SingularStiffness  # noqa: E402
from .export import IoError  # noqa: E402

_RC = {"svg.hashsalt": "coadapt", "svg.fonttype": "path", "path.simplify": False}


def _save(fig, path):
    try:
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    finally:
        plt.close(fig)
    return path


def plot_eps_norm(trace, path):
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.semilogy(trace.t, np.maximum(np.linalg.norm(trace.eps, axis=1), 1e-16), lw=0.6)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("|eps|")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_costs(trace, path):
    k = [p.period for p in trace.periods]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for name in ("J_c", "J_e", "J_r", "J"):
        vals = np.array([getattr(p, name) for p in trace.periods], float)
        if np.all(np.isnan(vals)):
            continue
        ax.semilogy(k, np.maximum(np.abs(vals), 1e-16), marker="o", ms=3, label=name)
    ax.set_xlabel("period")
    ax.set_ylabel("cost")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_force(trace, path):
    sl = trace.period_slice(trace.config.periods)
    t = trace.t[sl]
    F_d = trace.config.F_d.sample(t)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for i in range(trace.n):
        ax.plot(t, trace.f[sl, i], lw=0.8, label=f"f_{i + 1}")
        ax.plot(t, F_d[:, i], "--", lw=0.8, label=f"F_d_{i + 1}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("force [N]")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_positions(trace, path):
    try:
        x_d, _ = desired_targets(trace.config)
    except (NonConstantEnvironment, SingularStiffness):
        x_d = None
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for i in range(trace.n):
        ax.plot(trace.t, trace.x[:, i], lw=0.6, label=f"x_{i + 1}")
        ax.plot(trace.t, trace.x_r[:, i], lw=0.6, label=f"x_r_{i + 1}")
        if x_d is not None:
            ax.axhline(x_d[i], ls="--", lw=0.8, color="k", label=f"x_d_{i + 1}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("position [m]")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def emit_plots(trace, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_RC):
        return [
            plot_eps_norm(trace, out / "eps_norm.svg"),
            plot_costs(trace, out / "costs.svg"),
            plot_force(trace, out / "force.svg"),
            plot_positions(trace, out / "positions.svg"),
        ]
