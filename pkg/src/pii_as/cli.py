"""Command-line front end.

    python -m pii_as coeffs --alpha 0.25 --n-max 10
    python -m pii_as connect --family imag --alpha 0.3i --k 0.5i
    python -m pii_as verify --alpha 0.25 --k 0.3
    python -m pii_as scan --grid default

Exit codes: 0 success / pass, 1 verification failure, 2 parse or domain
error, 3 unexpected pole. On exit 2 and 3 nothing is written to stdout and a
single diagnostic line goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import asymp_series, connection as conn, pii_ode, verifier
from .connection import Family, PIIParams
from .specfun import DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_POLE = 0, 1, 2, 3
N_MAX_COEFFS = 50


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# number grammar: "1.5", "-0.3i", "i", "0.2+0.1i", "1e-3-2i"

_UNSIGNED = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL = re.compile(rf"^[+-]?{_UNSIGNED}$")
_IMAG = re.compile(rf"^(?P<c>[+-]?(?:{_UNSIGNED})?)[ij]$")
_BOTH = re.compile(rf"^(?P<r>[+-]?{_UNSIGNED})(?P<c>[+-](?:{_UNSIGNED})?)[ij]$")


def _coef(text: str) -> float:
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return float(text)


def parse_number(text: str) -> complex:
    s = text.strip().replace(" ", "")
    if _REAL.match(s):
        return complex(float(s), 0.0)
    m = _IMAG.match(s)
    if m:
        return complex(0.0, _coef(m.group("c")))
    m = _BOTH.match(s)
    if m:
        return complex(float(m.group("r")), _coef(m.group("c")))
    raise UsageError(f"cannot parse number {text!r}")


def fmt(v: float) -> str:
    """17 significant digits; round-trips doubles exactly."""
    return format(float(v), ".17g")


def _json_num(v: float):
    v = float(v)
    return v if math.isfinite(v) else None


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    family: Family = Family.REAL
    alpha: complex = 0j
    k: complex = 0j
    x0: float = 15.0
    x_end: float = -150.0
    tol: float = 1e-11
    stations: int = 24
    output: str = "json"
    out_path: Optional[str] = None

    @property
    def params(self) -> PIIParams:
        return PIIParams(self.alpha, self.k, self.family)


def _config(args, output_default: str = "json") -> RunConfig:
    fam = Family(args.family)
    try:
        params = PIIParams(parse_number(args.alpha), parse_number(args.k), fam)
    except conn.InvalidParams as exc:
        raise UsageError(str(exc)) from exc
    return RunConfig(
        fam, params.alpha, params.k,
        args.x0, args.x_end, args.tol, args.stations,
        args.format or output_default, args.out,
    )


# ---------------------------------------------------------------------------
# output


class Output:
    """Collects text; written to --out or stdout only once the exit code is known."""

    def __init__(self, path: Optional[str]):
        self.path = path
        self.buf = io.StringIO()

    def csv(self, header, rows):
        w = csv.writer(self.buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating, int)) and not isinstance(v, bool) else v for v in r])

    def json(self, obj):
        self.buf.write(json.dumps(obj, indent=2, allow_nan=False) + "\n")

    def flush(self, to_stdout: bool = True):
        text = self.buf.getvalue()
        if self.path:
            with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        elif to_stdout:
            sys.stdout.write(text)


def _family_fields(p: PIIParams) -> dict:
    return {
        "family": p.family.value,
        "alpha": _json_num(p.gamma),
        "k": _json_num(p.kappa),
        "alpha_is_imaginary": p.family is Family.IMAG,
    }


def _d_key(p: PIIParams, base: str = "d") -> str:
    return base if p.family is Family.REAL else base + "_im"


def _d_value(p: PIIParams, d: complex) -> float:
    return d.real if p.family is Family.REAL else d.imag


# ---------------------------------------------------------------------------
# subcommands


def cmd_coeffs(args) -> int:
    alpha = parse_number(args.alpha)
    if alpha.real != 0.0 and alpha.imag != 0.0:
        raise UsageError("alpha must be real or purely imaginary")
    if not abs(alpha.real) < 0.5:
        raise UsageError(f"real alpha must satisfy |alpha| < 1/2, got {alpha.real}")
    if not 0 <= args.n_max <= N_MAX_COEFFS:
        raise UsageError(f"n-max must lie in [0, {N_MAX_COEFFS}]")
    sc = asymp_series.series_coeffs(alpha, args.n_max)
    out = Output(args.out)
    out.csv(["n", "a_n"], [(n, complex(a).real) for n, a in enumerate(sc.coeffs)])
    out.flush()
    return EXIT_OK


def _connection_json(p: PIIParams) -> dict:
    data = conn.connection(p)
    if isinstance(data, conn.TrivialConnection):
        return {**_family_fields(p), "trivial": True}
    s = conn.stokes_from_params(p)
    return {
        **_family_fields(p),
        "trivial": False,
        _d_key(p): _d_value(p, data.d),
        "phi": data.phi,
        "nu_im": data.nu.imag,
        "s1_re": s.s1.real, "s1_im": s.s1.imag,
        "s2_re": s.s2.real, "s2_im": s.s2.imag,
        "s3_re": s.s3.real, "s3_im": s.s3.imag,
    }


def cmd_connect(args) -> int:
    cfg = _config(args)
    try:
        obj = _connection_json(cfg.params.check_admissible())
    except conn.InvalidParams as exc:
        raise UsageError(str(exc)) from exc
    out = Output(cfg.out_path)
    out.json(obj)
    out.flush()
    return EXIT_OK


def cmd_integrate(args) -> int:
    cfg = _config(args, "csv")
    p = cfg.params
    traj = pii_ode.solve_as(p, cfg.x0, cfg.x_end, cfg.tol, dx=args.dx)
    out = Output(cfg.out_path)
    if p.family is Family.REAL:
        out.csv(["x", "u", "u_prime"], zip(traj.x, traj.y, traj.yp))
    else:
        z = np.zeros(len(traj))
        out.csv(
            ["x", "u_re", "u_im", "u_prime_re", "u_prime_im", "v", "v_prime"],
            zip(traj.x, z, traj.y, z, traj.yp, traj.y, traj.yp),
        )
    if isinstance(traj.status, pii_ode.PoleDetected):
        out.flush(to_stdout=False)
        print(f"pole detected near x = {fmt(traj.status.x_pole)}", file=sys.stderr)
        return EXIT_POLE
    if isinstance(traj.status, pii_ode.ToleranceFailure):
        out.flush()
        print(f"tolerance failure at x = {fmt(traj.status.x_fail)}", file=sys.stderr)
        return EXIT_FAIL
    out.flush()
    return EXIT_OK


def _report_json(rep: verifier.VerificationReport) -> dict:
    p = rep.params
    obj = {**_family_fields(p)}
    pred = rep.predicted
    have = isinstance(pred, conn.ConnectionData)
    obj[_d_key(p, "d_pred")] = _json_num(_d_value(p, pred.d)) if have else None
    obj["phi_pred"] = _json_num(pred.phi) if have else None
    obj["nu_im"] = _json_num(pred.nu.imag) if have else None
    fit = rep.fitted
    obj[_d_key(p, "d_fit")] = _json_num(_d_value(p, fit.d_fit)) if fit else None
    obj["phi_fit"] = _json_num(fit.phi_fit) if fit else None
    obj["fit_residual"] = _json_num(fit.fit_residual) if fit else None
    obj["err_d_rel"] = _json_num(rep.err_d_rel)
    obj["err_phi_abs"] = _json_num(rep.err_phi_abs)
    obj["pole_status"] = rep.pole_status.name
    obj["x_pole"] = _json_num(rep.pole_status.x_pole) if isinstance(rep.pole_status, pii_ode.PoleDetected) else None
    obj["pass"] = rep.passed
    obj["message"] = rep.message
    return obj


def cmd_verify(args) -> int:
    cfg = _config(args)
    p = cfg.params
    if p.family is Family.REAL and not abs(p.gamma) < 0.5:
        raise UsageError("real family needs |alpha| < 1/2")
    vcfg = verifier.VerifyConfig(x0=cfg.x0, x_end=cfg.x_end, tol=cfg.tol, stations=cfg.stations)
    rep = verifier.verify_connection(p, vcfg)
    out = Output(cfg.out_path)
    if cfg.output == "csv":
        fit = rep.fitted
        rows = [] if fit is None else zip(fit.x, (fit.d_est.real if p.family is Family.REAL else fit.d_est.imag), fit.phi_est)
        out.csv(["x", _d_key(p, "d_est"), "phi_est"], rows)
    else:
        out.json(_report_json(rep))
    if isinstance(rep.pole_status, pii_ode.PoleDetected):
        out.flush(to_stdout=False)
        print(f"pole detected near x = {fmt(rep.pole_status.x_pole)}", file=sys.stderr)
        return EXIT_POLE
    out.flush()
    return EXIT_OK if rep.passed else EXIT_FAIL


def parse_grid(spec: str) -> list:
    """'default' or '+'-joined blocks 'real:A1,A2/R1,R2' (k = r cos(pi alpha))
    and 'imag:B1,B2/K1,K2' (alpha = i B, k = i K)."""
    if spec == "default":
        return default_scan_grid()
    grid = []
    for block in spec.split("+"):
        try:
            fam, body = block.split(":")
            left, right = body.split("/")
            a_vals = [float(v) for v in left.split(",")]
            r_vals = [float(v) for v in right.split(",")]
        except ValueError as exc:
            raise UsageError(f"bad grid block {block!r}") from exc
        if fam == "real":
            for a in a_vals:
                if not abs(a) < 0.5:
                    raise UsageError(f"real family needs |alpha| < 1/2, got {a}")
                grid += [PIIParams.real(a, r * math.cos(math.pi * a)) for r in r_vals]
        elif fam == "imag":
            grid += [PIIParams.imag(b, kk) for b in a_vals for kk in r_vals]
        else:
            raise UsageError(f"unknown family {fam!r} in grid")
    return grid


def default_scan_grid() -> list:
    ratios = (-0.95, -0.9, -0.6, -0.2, 0.0, 0.2, 0.6, 0.9, 0.95)
    return verifier.admissible_grid(ratios=ratios) + [
        PIIParams.imag(b, kk) for b in (0.0, 0.3, 0.8) for kk in (0.3, 1.0, 3.0)
    ]


def cmd_scan(args) -> int:
    grid = parse_grid(args.grid)
    x_end = args.x_end if args.x_end_given else -60.0
    rows = verifier.scan_pole_free(grid, (x_end, args.x0), args.tol)
    out = Output(args.out)
    out.csv(
        ["family", "alpha", "k", "admissible", "status", "x_pole", "max_abs_u"],
        [(r.params.family.value, r.params.gamma, r.params.kappa, str(r.params.admissible).lower(),
          r.status, r.x_pole, r.max_abs_u) for r in rows],
    )
    bad = [r for r in rows if r.params.admissible and r.status != "Completed"]
    if any(r.status == "PoleDetected" for r in bad):
        out.flush(to_stdout=False)
        print(f"{len(bad)} admissible grid point(s) did not complete", file=sys.stderr)
        return EXIT_POLE
    out.flush()
    return EXIT_FAIL if bad else EXIT_OK


def lax_deviation(x, u, up, upp, alpha, lam) -> float:
    """max entry of |M + 2 R sigma_1|."""
    M = pii_ode.lax_compatibility(x, u, up, upp, alpha, lam)
    R = pii_ode.pii_residual(x, u, upp, alpha)
    return float(np.max(np.abs(M + 2.0 * R * pii_ode.SIGMA1)))


def cmd_laxcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.draws):
        x = rng.uniform(-20, 20)
        u, up, upp, alpha = (complex(*rng.normal(size=2)) for _ in range(4))
        if args.lam is not None:
            lam = parse_number(args.lam)
        else:
            lam = 10 ** rng.uniform(-1, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        worst = max(worst, lax_deviation(x, u, up, upp, alpha, lam))
    ok = worst <= 1e-12
    out = Output(args.out)
    out.json({"draws": args.draws, "seed": args.seed, "max_deviation": worst, "pass": ok})
    out.flush()
    return EXIT_OK if ok else EXIT_FAIL


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    out = Output(args.out)
    for name, ok, detail in results:
        out.buf.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
    n_ok = sum(ok for _, ok, _ in results)
    out.buf.write(f"{n_ok}/{len(results)} checks passed\n")
    out.flush()
    return EXIT_OK if n_ok == len(results) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pii_as", description="Pole-free decaying solutions of Painleve II")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(sp, with_params=True, x_end=-150.0):
        if with_params:
            sp.add_argument("--family", choices=[f.value for f in Family], default="real")
            sp.add_argument("--alpha", default="0")
            sp.add_argument("--k", default="0")
        sp.add_argument("--x0", type=float, default=15.0)
        sp.add_argument("--x-end", type=float, default=None)
        sp.add_argument("--tol", type=float, default=1e-11)
        sp.add_argument("--stations", type=int, default=24)
        sp.add_argument("--format", choices=["csv", "json"], default=None)
        sp.add_argument("--out", default=None)
        sp.set_defaults(x_end_default=x_end)

    sp = sub.add_parser("coeffs", help="series coefficients a_n")
    sp.add_argument("--alpha", default="0")
    sp.add_argument("--n-max", type=int, default=20)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_coeffs)

    sp = sub.add_parser("connect", help="predicted (d, phi, nu) and Stokes data")
    common(sp)
    sp.set_defaults(func=cmd_connect)

    sp = sub.add_parser("integrate", help="sampled trajectory as CSV")
    common(sp)
    sp.add_argument("--dx", type=float, default=0.05)
    sp.set_defaults(func=cmd_integrate)

    sp = sub.add_parser("verify", help="integrate, fit and compare with the connection formulas")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("scan", help="pole-free scan over a parameter grid")
    common(sp, with_params=False, x_end=-60.0)
    sp.add_argument("--grid", default="default")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("laxcheck", help="zero-curvature residual at random points")
    sp.add_argument("--lambda", dest="lam", default=None)
    sp.add_argument("--draws", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_laxcheck)

    sp = sub.add_parser("selftest", help="quick invariant suite")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if hasattr(args, "x_end_default"):
            args.x_end_given = args.x_end is not None
            if args.x_end is None:
                args.x_end = args.x_end_default
            if not args.x_end < args.x0:
                raise UsageError("--x-end must be below --x0")
            if not pii_ode.TOL_RANGE[0] <= args.tol <= pii_ode.TOL_RANGE[1]:
                raise UsageError(f"--tol must lie in {list(pii_ode.TOL_RANGE)}")
        return args.func(args)
    except (UsageError, DomainError, conn.InvalidParams, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
