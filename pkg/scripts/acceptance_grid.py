"""Run verify_connection over the real and imaginary grids and write one CSV row per case."""

import argparse
import csv
import math
import sys

from pii_as.connection import PIIParams
from pii_as.verifier import admissible_grid, verify_connection


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    grid = admissible_grid() + [PIIParams.imag(b, k) for b in (0.0, 0.3, 0.8) for k in (0.3, 1.0, 3.0)]
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["family", "alpha", "k", "err_d_rel", "err_phi_abs", "runtime_s", "join_gap", "pass"])
    for p in grid:
        r = verify_connection(p)
        w.writerow([p.family.value, p.gamma, p.kappa, f"{r.err_d_rel:.3e}", f"{r.err_phi_abs:.3e}",
                    f"{r.runtime:.2f}", f"{r.meta.get('join_gap', math.nan):.2e}", r.passed])
        fh.flush()


if __name__ == "__main__":
    main()
