"""Residual |u - B - k Ai| on [8, 15] for runs started from B + k Ai at x = 15.

Prints residual / (|k| Ai) and the series truncation estimate next to it, so the
two regimes are visible: at alpha = 0 the ratio is rounding noise, at alpha != 0
it is set by the truncation of B, which is of the same size as k Ai.
"""

import argparse

import numpy as np

from pii_as.connection import PIIParams
from pii_as.verifier import verify_plus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.0, 0.25, 0.4])
    ap.add_argument("--k", type=float, default=0.5)
    args = ap.parse_args()
    for a in args.alpha:
        r = verify_plus(PIIParams.real(a, args.k))
        print(f"alpha={a:g} k={args.k:g}: slope {r.slope:.2f} +- {r.slope_stderr:.2f}")
        print(f"{'x':>6} {'residual':>10} {'k Ai':>10} {'ratio':>10} {'series err':>10}")
        for i in np.linspace(0, len(r.x) - 1, 8).astype(int):
            print(f"{r.x[i]:6.2f} {r.residual[i]:10.2e} {r.k_ai[i]:10.2e} "
                  f"{r.residual[i] / r.k_ai[i]:10.2e} {r.series_err[i]:10.2e}")


if __name__ == "__main__":
    main()
