"""Accuracy of the principal-branch Lambert W solver.

The scheduler's closed-form transmit power needs W0(z) for z >= 0. This
script sweeps z across fifteen decades, reports the worst defining-equation
residual |w*e^w - z|, and checks the two classic identities W0(0) = 0 and
W0(e) = 1.
"""

import math

import numpy as np

from fedsched.lambertw import lambert_w0


def main():
    zs = np.logspace(-6, 9, 31)
    print(f"{'z':>12}  {'W0(z)':>18}  {'residual':>10}  iters")
    worst = 0.0
    for z in zs:
        r = lambert_w0(float(z))
        rel = r.residual / max(1.0, z)
        worst = max(worst, rel)
        print(f"{z:12.4g}  {r.w:18.12f}  {rel:10.2e}  {r.iterations:>5}")
    print(f"\nworst relative residual over sweep: {worst:.2e}")
    print(f"W0(0)       = {lambert_w0(0.0).w} (exact 0)")
    print(f"W0(e) - 1   = {lambert_w0(math.e).w - 1.0:.2e} (exact 0)")


if __name__ == "__main__":
    main()
