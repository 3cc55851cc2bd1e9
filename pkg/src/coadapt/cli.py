"""Command-line entry point: ``coadapt simulate | sweep | check``.

Exit codes: 0 success, 2 configuration error, 3 divergence or solver
failure, 4 acceptance check failed, 5 output could not be written.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from urllib.parse import quote

import yaml

from . import acceptance
from .errors import ConfigError, IllConditioned, NonFiniteState, SingularConfiguration, SolverFailure
from .export import FMT, IoError, emit_trace_csv, summary_line
from .scenario import apply_overrides, bundled_path, config_from_dict, dump_scenario
from .seedless import no_rng
from .simulation import run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_CHECK, EXIT_IO = 0, 2, 3, 4, 5
SWEEP_CAP = 256
DIVERGENCE_ERRORS = (NonFiniteState, SolverFailure, SingularConfiguration, IllConditioned)


def _resolve_scenario(arg):
    path = Path(arg)
    if path.exists():
        return path
    if path.suffix in ("", ".scenario") and path.parent == Path("."):
        return bundled_path(path.stem)
    raise ConfigError("file not found", str(path))


def _load_dict(arg):
    path = _resolve_scenario(arg)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}", str(path)) from None
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping", str(path))
    return data


def _overrides(args):
    out = {}
    if getattr(args, "variant", None):
        out["controller.variant"] = args.variant
    if getattr(args, "periods", None) is not None:
        out["timing.periods"] = args.periods
    return out


def simulate_one(data: dict, out_dir, plots=False, seedless=False):
    """Parse, run and export one scenario dict; returns the trace."""
    cfg = config_from_dict(data)
    guard = no_rng() if seedless else contextlib.nullcontext()
    with guard:
        trace = run_scenario(cfg)
    out = Path(out_dir)
    emit_trace_csv(trace, out)
    try:
        (out / "scenario.yaml").write_text(dump_scenario(cfg))
    except OSError as exc:
        raise IoError(f"cannot write {out / 'scenario.yaml'}: {exc}") from None
    if plots:
        from .plots import emit_plots
        emit_plots(trace, out)
    return trace


def cmd_simulate(args):
    data = apply_overrides(_load_dict(args.scenario), _overrides(args))
    trace = simulate_one(data, args.out, args.plots, args.seedless)
    for pc in trace.periods:
        print(summary_line(pc))
    print(f"wrote {len(trace)} trace rows to {Path(args.out) / 'trace.csv'}")
    return EXIT_OK


def combo_dirname(assignment: dict) -> str:
    """Injective directory name for a parameter assignment (keys sorted)."""
    return ",".join(f"{quote(k, safe='._-')}={quote(json.dumps(v), safe='._-')}"
                    for k, v in sorted(assignment.items()))


def load_manifest(path):
    try:
        m = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read manifest: {exc}", str(path)) from None
    if not isinstance(m, dict) or "axes" not in m:
        raise ConfigError("missing", "manifest.axes")
    axes = m["axes"]
    if not isinstance(axes, dict) or not axes:
        raise ConfigError("must map parameter paths to value lists", "manifest.axes")
    for k, v in axes.items():
        if not isinstance(v, list) or not v:
            raise ConfigError("must be a non-empty list", f"manifest.axes.{k}")
    return m


def expand_axes(axes: dict, cap=SWEEP_CAP):
    keys = sorted(axes)
    size = math.prod(len(axes[k]) for k in keys)
    if size > cap:
        raise ConfigError(f"sweep has {size} combinations, cap is {cap}", "manifest.axes")
    return [dict(zip(keys, values)) for values in itertools.product(*(axes[k] for k in keys))]


def _sweep_job(job):
    data, out_dir, plots, seedless, assignment = job
    row = {"run": combo_dirname(assignment), **{k: json.dumps(v) for k, v in assignment.items()}}
    try:
        trace = simulate_one(data, out_dir, plots, seedless)
    except ConfigError as exc:
        return {**row, "status": "config-error", "message": str(exc)}
    except DIVERGENCE_ERRORS as exc:
        return {**row, "status": "diverged", "message": str(exc)}
    last = trace.periods[-1]
    return {**row, "status": "ok", "message": "", "J_final": FMT % last.J, "rms_eps_final": FMT % last.rms_eps,
            "max_force_err_final": FMT % last.max_force_err}


def cmd_sweep(args):
    manifest = load_manifest(args.manifest)
    scenario = args.scenario or manifest.get("scenario")
    if not scenario:
        raise ConfigError("missing (give --scenario or manifest.scenario)", "scenario")
    base = apply_overrides(_load_dict(scenario), _overrides(args))
    combos = expand_axes(manifest["axes"], manifest.get("cap", SWEEP_CAP))
    out = Path(args.out)
    jobs = []
    for assignment in combos:
        data = apply_overrides(base, assignment)
        config_from_dict(data)  # fail fast before any run starts
        jobs.append((data, out / combo_dirname(assignment), args.plots, args.seedless, assignment))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    fields = ["run"] + sorted(manifest["axes"]) + ["status", "message", "J_final", "rms_eps_final",
                                                    "max_force_err_final"]
    try:
        out.mkdir(parents=True, exist_ok=True)
        with (out / "sweep.csv").open("w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=fields, restval="")
            wr.writeheader()
            wr.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write sweep summary: {exc}") from None
    for r in rows:
        print(f"{r['status']:<13} {r['run']}")
    n_bad = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows) - n_bad}/{len(rows)} runs completed; summary in {out / 'sweep.csv'}")
    if any(r["status"] == "config-error" for r in rows):
        return EXIT_CONFIG
    return EXIT_DIVERGED if n_bad else EXIT_OK


def cmd_check(args):
    acceptance.set_periods(args.periods)
    acceptance.SEEDLESS = args.seedless
    results = []
    for crit in acceptance.CRITERIA:
        r = crit()
        results.append(r)
        print(r.line(), flush=True)
    print()
    print(acceptance.format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def build_parser():
    p = argparse.ArgumentParser(prog="coadapt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario_required):
        sp.add_argument("--scenario", required=scenario_required,
                        help="scenario file, or the name of a bundled scenario (e.g. wall_1dof)")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--variant", choices=("full", "no-damping"), help="override the controller variant")
        sp.add_argument("--periods", type=int, help="override the number of periods")
        sp.add_argument("--plots", action="store_true", help="also write SVG diagnostics")
        sp.add_argument("--seedless", action="store_true", help="fail if any random number is drawn")

    s = sub.add_parser("simulate", help="run one scenario and write trace.csv / periods.csv")
    common(s, True)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="run the cartesian product of manifest axes")
    w.add_argument("manifest", help="YAML manifest with 'axes' (dotted key -> list of values)")
    common(w, False)
    w.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    w.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check", help="run the bundled acceptance scenarios and print a pass/fail table")
    c.add_argument("--periods", type=int, help="override the number of periods (faster, not the stated criteria)")
    c.add_argument("--seedless", action="store_true", help="fail if a simulation draws a random number")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "periods", None) is not None and args.periods < 2:
        print("error: --periods must be >= 2", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DIVERGENCE_ERRORS as exc:
        print(f"diverged: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except IoError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
