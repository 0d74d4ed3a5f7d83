"""Connection errors with the two +infinity starts.

The real-axis start B + k Ai at x0 = 15 cannot resolve k when alpha != 0: the
optimally truncated series is only good to about its smallest term, which is
the size of Ai(15) itself. The complex-ray start does not have this problem.
"""

import argparse

from pii_as.connection import PIIParams
from pii_as.pii_ode import InitConfig
from pii_as.verifier import VerifyConfig, verify_connection

CASES = [(0.0, 0.5), (0.1, 0.3), (0.25, 0.3), (0.45, 0.1), (-0.4, -0.25)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.parse_args()
    print(f"{'alpha':>6} {'k':>6} | {'series err_d':>12} {'series err_phi':>14} | {'ray err_d':>10} {'ray err_phi':>11}")
    for a, k in CASES:
        p = PIIParams.real(a, k)
        s = verify_connection(p, VerifyConfig(init=InitConfig("series")))
        r = verify_connection(p, VerifyConfig(init=InitConfig("ray")))
        print(f"{a:6.2f} {k:6.2f} | {s.err_d_rel:12.2e} {s.err_phi_abs:14.2e} | {r.err_d_rel:10.2e} {r.err_phi_abs:11.2e}")


if __name__ == "__main__":
    main()
