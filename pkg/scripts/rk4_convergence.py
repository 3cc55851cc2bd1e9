"""Endpoint error of RK4 on the unactuated two-link arm as h is halved."""
from coadapt.acceptance import passive_two_link_error

if __name__ == "__main__":
    steps = [0.04, 0.02, 0.01, 0.005, 0.0025]
    h_ref = steps[-1] / 16
    errs = [passive_two_link_error(h, h_ref=h_ref) for h in steps]
    print(f"{'h':>8}  {'error':>12}  ratio")
    for i, (h, e) in enumerate(zip(steps, errs)):
        ratio = "" if i == 0 else f"{errs[i - 1] / e:6.2f}"
        print(f"{h:8.4f}  {e:12.4e}  {ratio}")
