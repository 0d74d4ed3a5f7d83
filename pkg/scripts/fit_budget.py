"""Phase and amplitude errors of the station fit on synthetic data with a c/X offset."""

import argparse
import math

import numpy as np

from pii_as.connection import PIIParams, circular_distance
from pii_as.pii_ode import Completed, StepStats, Trajectory
from pii_as.verifier import default_stations, fit_oscillation


def synthetic(d, phi, c):
    x = default_stations()
    X = -x
    th = (2.0 / 3.0) * X ** 1.5 - 0.75 * d * d * np.log(X) + phi
    y = d * X ** -0.25 * np.cos(th) + c / X
    yp = d * X ** 0.25 * np.sin(th) + c / X ** 2
    return Trajectory(PIIParams.real(0.0, 0.5), x, y, yp, 1e-11, StepStats(0.1, 0.1, 1), Completed())


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=float, default=0.3)
    ap.add_argument("--phi", type=float, default=1.0)
    args = ap.parse_args()
    print(f"{'c':>6} {'phi at -60':>11} {'phi fit':>9} {'d fit':>9}")
    for c in (0.0, 0.01, 0.03, 0.1, 0.3):
        f = fit_oscillation(synthetic(args.d, args.phi, c))
        print(f"{c:6.2f} {circular_distance(float(f.phi_est[0]), args.phi):11.2e} "
              f"{circular_distance(f.phi_fit, args.phi):9.2e} {abs(f.d_fit - args.d):9.2e}")


if __name__ == "__main__":
    main()
