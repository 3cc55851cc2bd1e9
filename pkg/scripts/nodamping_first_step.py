"""Size of the first reference increment of the damping-free laws on the wall.

At the first adaptive step all estimates are zero and the robot is at
rest, so the coupled laws reduce to a cubic in delta_x_r. Its real root is
the jump the reference takes within one sample.
"""
import numpy as np

from coadapt import load_bundled
from coadapt.controller import adapt_no_damping

if __name__ == "__main__":
    cfg = load_bundled("wall_nodamping_1dof")
    z, Z = np.zeros(1), np.zeros((1, 1))
    F, KS, d = adapt_no_damping(z, z, cfg.F_d(0.0), z, Z, z, cfg.gains)
    print(f"delta x_r = {d[0]:.6f} m in one step of {cfg.h} s  (rate {d[0] / cfg.h:.1f} m/s)")
    print(f"F = {F[0]:.6f}, K_S = {KS[0, 0]:.6f}")
