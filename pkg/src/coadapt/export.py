"""CSV export of traces and per-period summaries.

Numbers are written with ``%.17g`` so that parsing the text back gives the
stored doubles exactly.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

FMT = "%.17g"
VECTOR_GROUPS = (("x", "x"), ("xdot", "xdot"), ("xr", "x_r"), ("e", "e"), ("eps", "eps"), ("F", "F"))
MATRIX_GROUPS = (("KS", "K_S"), ("KD", "K_D"))
TAIL_GROUPS = (("xir", "xi_r"), ("f", "f"), ("u", "u"), ("v", "v"), ("w", "w"))
PERIOD_COLUMNS = ("period", "J_c", "J_e", "J_r", "J", "delta_J", "rms_eps", "max_force_err", "margin_min", "slack_min")


class IoError(OSError):
    pass


def trace_columns(n):
    cols = ["t"]
    for prefix, _ in VECTOR_GROUPS:
        cols += [f"{prefix}_{i + 1}" for i in range(n)]
    for prefix, _ in MATRIX_GROUPS:
        cols += [f"{prefix}_{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    for prefix, _ in TAIL_GROUPS:
        cols += [f"{prefix}_{i + 1}" for i in range(n)]
    return cols


def trace_matrix(trace):
    S = len(trace)
    blocks = [trace.t[:, None]]
    blocks += [getattr(trace, attr) for _, attr in VECTOR_GROUPS]
    blocks += [getattr(trace, attr).reshape(S, -1) for _, attr in MATRIX_GROUPS]
    blocks += [getattr(trace, attr) for _, attr in TAIL_GROUPS]
    return np.hstack(blocks)


def _ensure_dir(out_dir):
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {out}: {exc}") from None
    return out


def emit_trace_csv(trace, out_dir):
    """Write trace.csv and periods.csv; returns the two paths."""
    out = _ensure_dir(out_dir)
    trace_path, periods_path = out / "trace.csv", out / "periods.csv"
    try:
        np.savetxt(trace_path, trace_matrix(trace), fmt=FMT, delimiter=",",
                   header=",".join(trace_columns(trace.n)), comments="")
        with periods_path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(PERIOD_COLUMNS)
            for pc in trace.periods:
                d = pc.as_dict()
                wr.writerow([d["period"]] + [FMT % d[c] for c in PERIOD_COLUMNS[1:]])
    except OSError as exc:
        raise IoError(f"cannot write CSV output in {out}: {exc}") from None
    return trace_path, periods_path


def read_trace_csv(path):
    """(columns, data) from a trace.csv."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def read_periods_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(v) if k == "period" else float(v)) for k, v in r.items()} for r in rows]


def summary_line(pc):
    def f(v):
        return "nan" if isinstance(v, float) and math.isnan(v) else f"{v:.4g}"
    return (f"period {pc.period:3d}  J={f(pc.J)}  dJ={f(pc.delta_J)}  rms_eps={f(pc.rms_eps)}  "
            f"max|f-F_d|={f(pc.max_force_err)}")
