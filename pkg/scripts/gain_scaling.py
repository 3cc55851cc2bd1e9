"""How far the wall scenario gets when the adaptation gains are scaled up.

Scales Q_F, Q_S, Q_D together by each factor, runs a shortened wall
scenario in parallel and reports final rendered force, J(P)/J(2) and the
final-period RMS tracking error. The stated gains correspond to scale 1.

    python scripts/gain_scaling.py [--periods P] [--jobs J]
"""
import argparse
import dataclasses
from concurrent.futures import ProcessPoolExecutor


from coadapt import load_bundled, run_scenario
from coadapt.errors import CoadaptError

SCALES = (1.0, 10.0, 100.0, 1000.0)


def one(args):
    scale, periods = args
    cfg = load_bundled("wall_1dof")
    g = cfg.gains.replace(Q_F=scale * cfg.gains.Q_F, Q_S=scale * cfg.gains.Q_S, Q_D=scale * cfg.gains.Q_D)
    cfg = dataclasses.replace(cfg, gains=g, periods=periods)
    try:
        tr = run_scenario(cfg)
    except CoadaptError as exc:
        return scale, None, str(exc)
    sl = tr.period_slice(periods)
    return scale, (float(tr.f[sl].mean()), tr.periods[-1].J / tr.periods[1].J, tr.periods[-1].rms_eps), ""


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--periods", type=int, default=10)
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args()
    with ProcessPoolExecutor(args.jobs) as pool:
        rows = list(pool.map(one, [(s, args.periods) for s in SCALES]))
    print(f"{'scale':>7}  {'mean f':>9}  {'J(P)/J(2)':>10}  {'rms eps':>9}")
    for scale, res, err in rows:
        if res is None:
            print(f"{scale:7g}  diverged: {err[:60]}")
        else:
            f, ratio, rms = res
            print(f"{scale:7g}  {f:9.4f}  {ratio:10.4f}  {rms:9.2e}")
    print("target: mean f = -5, J(P)/J(2) < 0.05")
