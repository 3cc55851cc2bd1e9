"""Run a bundled scenario and write CSVs and plots under results/<name>/.

    python scripts/run_default.py [scenario-name] [--periods P]
"""
import argparse
from pathlib import Path

from coadapt.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("scenario", nargs="?", default="wall_1dof")
    ap.add_argument("--periods", type=int)
    args = ap.parse_args()
    argv = ["simulate", "--scenario", args.scenario, "--out", str(ROOT / "results" / args.scenario), "--plots"]
    if args.periods:
        argv += ["--periods", str(args.periods)]
    raise SystemExit(main(argv))
