"""End-to-end checks: integrate an AS solution, read (d, phi) off the
oscillation at large negative x and compare with the connection formulas.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .asymp_series import eval_B_derivs
from .connection import (
    ConnectionData,
    Family,
    PIIParams,
    TrivialConnection,
    circular_distance,
    connection,
    reduce_phase,
)
from .pii_ode import (
    Completed,
    InitConfig,
    PoleDetected,
    Status,
    ToleranceFailure,
    Trajectory,
    integrate,
    solve_as,
    State,
)
from .specfun import airy_ai

AMPLITUDE_FLOOR = 1e-10
MAX_STATION_SPREAD = math.pi / 2
STATION_X_MAX = -40.0


class FitError(ValueError):
    """The oscillation model does not describe the trajectory."""


def default_stations(n: int = 24, lo: float = 60.0, hi: float = 150.0) -> np.ndarray:
    """Stations x_j = -(log-spaced in [lo, hi]), ordered by decreasing x."""
    return -np.geomspace(lo, hi, n)


@dataclass(frozen=True)
class FitResult:
    x: np.ndarray
    d_est: np.ndarray  # real for the cos model; imaginary (i |d|) for the sin model
    phi_est: np.ndarray  # unwrapped
    d_fit: complex
    phi_fit: float
    fit_residual: float
    d_slope: float = 0.0
    phi_slope: float = 0.0

    @property
    def stations(self) -> list:
        return list(zip(self.x.tolist(), self.d_est.tolist(), self.phi_est.tolist()))


def fit_oscillation(
    traj: Trajectory,
    stations: Optional[Sequence[float]] = None,
    model: Optional[Family] = None,
    exponent: float = -0.75,
) -> FitResult:
    """Amplitude and phase of y ~ |d| X^(-1/4) {cos | sin}(theta(X) + phi), X = -x.

    At each station the mean term gamma/x is removed first, then

        |d|_est = X^(1/4) sqrt(y^2 + y'^2 / X),
        theta   = atan2(y' X^(-1/4), y X^(1/4))   (+ pi/2 for the sin model),
        phi_est = theta - (2/3) X^(3/2) + (3/4) d^2 ln X,

    and both are extrapolated linearly in X^exponent to X -> infinity.
    ``stations`` must be sample points of ``traj``; default is all samples
    with x <= -40.
    """
    p = traj.params
    model = Family(model) if model is not None else p.family
    if not isinstance(traj.status, Completed):
        raise FitError(f"trajectory status is {traj.status.name}")
    if stations is None:
        mask = traj.x <= STATION_X_MAX
    else:
        mask = np.isin(traj.x, np.asarray(stations, dtype=float))
        if mask.sum() != len(stations):
            raise FitError("stations are not all sample points of the trajectory")
    x = traj.x[mask]
    if len(x) < 3:
        raise FitError("need at least three stations")
    if np.any(x > STATION_X_MAX):
        raise FitError(f"stations must satisfy x <= {STATION_X_MAX}")
    X = -x
    y = traj.y[mask] - p.gamma / x
    yp = traj.yp[mask] + p.gamma / x ** 2
    amp = X ** 0.25 * np.sqrt(y * y + yp * yp / X)
    if np.max(amp) < AMPLITUDE_FLOOR:
        raise FitError("amplitude below floor")
    theta = np.arctan2(yp * X ** -0.25, y * X ** 0.25)
    if model is Family.IMAG:
        theta = theta + 0.5 * math.pi
    d2 = amp ** 2 if model is Family.REAL else -amp ** 2
    phi = np.unwrap(theta - (2.0 / 3.0) * X ** 1.5 + 0.75 * d2 * np.log(X))
    if np.ptp(phi) > MAX_STATION_SPREAD:
        raise FitError(f"phase spread {np.ptp(phi):.3g} over stations exceeds pi/2")
    s = X ** exponent
    (da, db), d_res = _line(s, amp)
    (pa, pb), p_res = _line(s, phi)
    unit = 1.0 if model is Family.REAL else 1j
    return FitResult(
        x, unit * amp, phi, unit * db, reduce_phase(pb), max(d_res, p_res), da, pa,
    )


def _line(s: np.ndarray, v: np.ndarray):
    A = np.vstack([s, np.ones_like(s)]).T
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    r = v - A @ coef
    return coef, float(np.sqrt(np.mean(r * r)))


@dataclass(frozen=True)
class VerifyConfig:
    x0: float = 15.0
    x_end: float = -150.0
    tol: float = 1e-11
    stations: int = 24
    station_range: tuple = (60.0, 150.0)
    tol_d: float = 1e-3
    tol_phi: float = 1e-2
    init: InitConfig = InitConfig()


@dataclass
class VerificationReport:
    params: PIIParams
    predicted: Union[ConnectionData, TrivialConnection, None]
    fitted: Optional[FitResult]
    err_d_rel: float
    err_phi_abs: float
    pole_status: Status
    passed: bool
    message: str = ""
    runtime: float = 0.0
    meta: dict = field(default_factory=dict)


def verify_connection(p: PIIParams, cfg: VerifyConfig = VerifyConfig()) -> VerificationReport:
    """Integrate, fit, compare. Failures of any stage become a failed report."""
    t0 = time.perf_counter()
    predicted = fitted = None
    status: Status = ToleranceFailure(math.nan, "not run")
    err_d = err_phi = math.inf
    meta: dict = {}
    try:
        if p.is_trivial:
            raise FitError("alpha = k = 0: zero solution, nothing to fit")
        # outside the AS region there is no prediction, but the integration
        # still runs so that a pole shows up in the report
        predicted = connection(p) if p.admissible else None
        st = default_stations(cfg.stations, *cfg.station_range)
        if cfg.x_end > st[-1]:
            raise FitError(f"x_end = {cfg.x_end} does not reach the stations")
        traj = solve_as(p, cfg.x0, cfg.x_end, cfg.tol, sample_x=st, init=cfg.init)
        status = traj.status
        meta = dict(traj.meta)
        meta["n_steps"] = traj.step_stats.n_steps
        if not isinstance(status, Completed):
            msg = f"integration ended with {status.name}"
        elif predicted is None:
            msg = "parameters outside the admissible region: no prediction"
        else:
            fitted = fit_oscillation(traj, st)
            err_d = abs(fitted.d_fit / predicted.d - 1.0)
            err_phi = circular_distance(fitted.phi_fit, predicted.phi)
            msg = ""
    except Exception as exc:  # a report, never a crash
        msg = f"{type(exc).__name__}: {exc}"
    ok = isinstance(status, Completed) and err_d <= cfg.tol_d and err_phi <= cfg.tol_phi
    return VerificationReport(
        p, predicted, fitted, err_d, err_phi, status, ok, msg, time.perf_counter() - t0, meta,
    )


# ---------------------------------------------------------------------------
# +infinity check


@dataclass(frozen=True)
class PlusReport:
    params: PIIParams
    x: np.ndarray
    residual: np.ndarray  # |u - B - k Ai|
    series_err: np.ndarray  # err_est of the optimally truncated B
    k_ai: np.ndarray  # |k| Ai(x)
    c_empirical: float  # max of (residual - 10 err) / (|k| Ai x^(-3/4)), >= 0
    slope: float  # log-log slope of residual / (|k| Ai) against x (nan if k = 0)
    slope_stderr: float
    within_series_budget: bool  # residual <= 10 err_est everywhere
    rounding_floor: float = 0.0  # 64 eps max|u|: what double precision can resolve
    within_budget_above_floor: bool = True  # residual <= 10 err_est + rounding_floor


def _plus_state(p: PIIParams, x: float) -> tuple:
    b, bp, _, err = eval_B_derivs(p.alpha, x)
    ai = airy_ai(x)
    return b + p.k * ai.ai, bp + p.k * ai.ai_prime, b, err, ai.ai


def verify_plus(
    p: PIIParams, x_lo: float = 8.0, x_hi: float = 15.0, n: int = 29, tol: float = 1e-11,
) -> PlusReport:
    """Compare an integration started from B + k Ai at x_hi with B + k Ai on [x_lo, x_hi]."""
    if not 8.0 <= x_lo < x_hi <= 15.0:
        raise ValueError("need 8 <= x_lo < x_hi <= 15")
    xs = np.linspace(x_hi, x_lo, n)
    if p.is_trivial:
        z = np.zeros(n)
        return PlusReport(p, xs, z, z, z, 0.0, math.nan, math.nan, True, 0.0, True)
    u0, up0, *_ = _plus_state(p, x_hi)
    traj = integrate(p, x_hi, x_lo, State(x_hi, u0, up0), tol, xs)
    res, err, kai = np.empty(n), np.empty(n), np.empty(n)
    for i, x in enumerate(traj.x):
        _, _, b, e, ai = _plus_state(p, float(x))
        res[i] = abs(traj.u[i] - b - p.k * ai)
        err[i] = e
        kai[i] = abs(p.k) * ai
    within = bool(np.all(res <= 10.0 * err))
    floor = 64.0 * np.finfo(float).eps * float(np.max(np.abs(traj.y)))
    within_floor = bool(np.all(res <= 10.0 * err + floor))
    if abs(p.k) > 0:
        excess = np.maximum(res - 10.0 * err, 0.0)
        c_emp = float(np.max(excess / (kai * xs ** -0.75)))
        ok = res > 0
        lx, ly = np.log(xs[ok]), np.log(res[ok] / kai[ok])
        A = np.vstack([lx, np.ones_like(lx)]).T
        coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
        r = ly - A @ coef
        dof = max(len(lx) - 2, 1)
        se = math.sqrt(float(r @ r) / dof / float(np.sum((lx - lx.mean()) ** 2)))
        slope = float(coef[0])
    else:
        c_emp, slope, se = 0.0, math.nan, math.nan
    return PlusReport(p, xs, res, err, kai, c_emp, slope, se, within, floor, within_floor)


# ---------------------------------------------------------------------------
# pole-free scans


@dataclass(frozen=True)
class ScanRow:
    params: PIIParams
    status: str
    x_pole: float
    max_abs_u: float


def _sort_key(p: PIIParams):
    return (p.family.value, p.gamma, p.kappa)


def _scan_one(args) -> ScanRow:
    p, window, tol = args
    x_min, x_max = window
    x0 = max(15.0, x_max)
    xs = np.linspace(x_max, x_min, int(round((x_max - x_min) / 0.05)) + 1)
    try:
        traj = solve_as(p, x0, x_min, tol, sample_x=xs)
        st = traj.status
        xp = st.x_pole if isinstance(st, PoleDetected) else math.nan
        mx = float(np.max(np.abs(traj.y))) if len(traj) else math.nan
        return ScanRow(p, st.name, xp, mx)
    except Exception as exc:
        return ScanRow(p, f"ToleranceFailure: {type(exc).__name__}", math.nan, math.nan)


def num_workers() -> int:
    env = os.environ.get("PII_NUM_THREADS")
    if env:
        return max(1, int(env))
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


def scan_pole_free(
    grid: Sequence[PIIParams], window: tuple = (-60.0, 15.0), tol: float = 1e-11,
    workers: Optional[int] = None,
) -> list:
    """Integrate every grid point over ``window``; rows sorted by parameters."""
    x_min, x_max = window
    if not -150.0 <= x_min < x_max <= 15.0:
        raise ValueError("window must lie in [-150, 15]")
    grid = sorted(set(grid), key=_sort_key)
    jobs = [(p, (x_min, x_max), tol) for p in grid]
    workers = num_workers() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [_scan_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_scan_one, jobs))


def admissible_grid(
    alphas: Sequence[float] = (-0.4, -0.25, 0.0, 0.1, 0.3, 0.45),
    ratios: Sequence[float] = (-0.9, -0.6, -0.2, 0.2, 0.6, 0.9),
) -> list:
    """Real-family points k = r cos(pi alpha)."""
    return [PIIParams.real(a, r * math.cos(math.pi * a)) for a in alphas for r in ratios]
