"""The PII equation u'' = 2u^3 + xu - alpha: residuals, Lax pair, integration.

Both solution families are integrated in a real variable y with u = y
(real family) or u = i y (imaginary family), which turns the equation into

    y'' = 2 sigma y^3 + x y - gamma,   sigma = +1 / -1,  gamma = Re / Im alpha.

Initialization
--------------
``init_plus`` builds the state B(alpha; x0) + k Ai(x0) at a large x0. For
alpha != 0 that state cannot pin down k: the optimally truncated series is
only accurate to about its smallest term, which at real x is comparable to
Ai(x) itself, and k Ai(15) ~ 1e-18 is below the rounding of B(15) ~ 1e-2.

``init_ray`` avoids both problems by starting on the ray arg x = pi/4, where
the series truncation error is ~1e-11 relative to the decaying mode, adding
(kappa + i J) times the decaying linear mode there (J = sin(pi alpha) or
sinh(pi Im alpha)), and integrating the complex equation back to a real
point. The imaginary part that survives on the real axis is a built-in
accuracy check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import dop853
from .asymp_series import eval_B_derivs, series_coeffs
from .connection import PIIParams
from .specfun import DomainError, airy_ai, airy_ai_complex

POLE_THRESHOLD = 1e6
STEP_FLOOR = 1e-12
# |y| at a step-size collapse above which the collapse is read as a pole.
POLE_AT_FLOOR = 1e2
TOL_RANGE = (1e-14, 1e-6)

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)


class ToleranceError(RuntimeError):
    """Raised when a solve that must succeed cannot meet its tolerance."""


# ---------------------------------------------------------------------------
# states, statuses, trajectories


@dataclass(frozen=True)
class State:
    x: float
    u: complex
    up: complex


@dataclass(frozen=True)
class Completed:
    name = "Completed"


@dataclass(frozen=True)
class PoleDetected:
    x_pole: float
    name = "PoleDetected"


@dataclass(frozen=True)
class ToleranceFailure:
    x_fail: float
    message: str = ""
    name = "ToleranceFailure"


Status = Union[Completed, PoleDetected, ToleranceFailure]


@dataclass(frozen=True)
class StepStats:
    h_min: float
    h_max: float
    n_steps: int
    n_rejected: int = 0


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples in decreasing x of y, y' with u = unit * y."""

    params: PIIParams
    x: np.ndarray
    y: np.ndarray
    yp: np.ndarray
    tol: float
    step_stats: StepStats
    status: Status
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for a in (self.x, self.y, self.yp):
            a.setflags(write=False)

    @property
    def u(self) -> np.ndarray:
        return self.params.unit * self.y

    @property
    def up(self) -> np.ndarray:
        return self.params.unit * self.yp

    @property
    def samples(self) -> list:
        unit = self.params.unit
        return [State(float(x), unit * y, unit * yp) for x, y, yp in zip(self.x, self.y, self.yp)]

    def __len__(self) -> int:
        return len(self.x)


# ---------------------------------------------------------------------------
# residuals and the Lax pair


def pii_residual(x, u, upp, alpha):
    """upp - 2u^3 - xu + alpha."""
    return upp - 2.0 * u ** 3 - x * u + alpha


@dataclass(frozen=True, eq=False)
class LaxMatrices:
    A: np.ndarray
    U: np.ndarray
    lam: complex


def lax_matrices(x, u, up, alpha, lam) -> LaxMatrices:
    lam = complex(lam)
    if lam == 0:
        raise DomainError("A(lambda) is singular at lambda = 0")
    A = -1j * (4 * lam ** 2 + x + 2 * u ** 2) * SIGMA3 - (4 * lam * u + alpha / lam) * SIGMA2 - 2 * up * SIGMA1
    U = -1j * lam * SIGMA3 - u * SIGMA2
    return LaxMatrices(A, U, lam)


def lax_compatibility(x, u, up, upp, alpha, lam) -> np.ndarray:
    """dA/dx - dU/dlambda + AU - UA, with x-derivatives through (up, upp)."""
    m = lax_matrices(x, u, up, alpha, lam)
    lam = m.lam
    dA_dx = -1j * (1 + 4 * u * up) * SIGMA3 - 4 * lam * up * SIGMA2 - 2 * upp * SIGMA1
    dU_dlam = -1j * SIGMA3
    return dA_dx - dU_dlam + m.A @ m.U - m.U @ m.A


# ---------------------------------------------------------------------------
# right-hand sides


def rhs_real(sigma: float, gamma: float):
    two_sigma = 2.0 * sigma

    def f(x, Y):
        y = Y[0]
        return np.array([Y[1], two_sigma * y * y * y + x * y - gamma])

    return f


def _along(fun, z0: complex, z1: complex):
    # parametrise the segment z0 -> z1 by s in [0, 1]
    dz = z1 - z0

    def g(s, Y):
        return dz * fun(z0 + s * dz, Y)

    return g


# ---------------------------------------------------------------------------
# initialization


def _to_real(z: complex, what: str) -> float:
    z = complex(z)
    if abs(z.imag) > 1e-14 * max(1.0, abs(z.real)):
        raise DomainError(f"{what} = {z} is not representable in the family's real variable")
    return z.real


def init_plus(p: PIIParams, x0: float) -> State:
    """u = B(alpha; x0) + k Ai(x0), u' = B'(alpha; x0) + k Ai'(x0)."""
    if not x0 >= 12:
        raise DomainError(f"init_plus needs x0 >= 12, got {x0!r}")
    b, bp, _, _ = eval_B_derivs(p.alpha, x0)
    ai = airy_ai(x0)
    return State(float(x0), b + p.k * ai.ai, bp + p.k * ai.ai_prime)


def _state_to_y(p: PIIParams, s: State) -> np.ndarray:
    unit = p.unit
    return np.array([_to_real(s.u / unit, "u/unit"), _to_real(s.up / unit, "u'/unit")])


@dataclass(frozen=True)
class RayConfig:
    """Geometry of the complex-ray initialization."""

    radius: float = 15.0
    angle: float = math.pi / 4
    far: float = 40.0
    x_real: float = 6.0
    tol: float = 1e-13


@dataclass(frozen=True)
class RayInit:
    state: State
    imag_residual: float  # |Im y| left at the real endpoint
    truncation: float  # series truncation estimate at the ray point
    n_steps: int


class _SeriesY:
    """Optimally truncated B/unit at complex points (hot loop of the ray solves)."""

    def __init__(self, p: PIIParams, n_max: int = 70):
        sc = series_coeffs(p.alpha, n_max)
        self.a = [complex(c).real for c in sc.coeffs]
        self.gamma = p.gamma

    def __call__(self, z):
        inv3 = z ** -3
        t = self.gamma / z
        s = ds = 0j
        prev = math.inf
        for n, a in enumerate(self.a):
            term = a * t
            m = abs(term)
            if m >= prev:
                return s, ds / z, m
            s += term
            ds -= (3 * n + 1) * term
            prev = m
            t *= inv3
        return s, ds / z, math.inf


def decaying_mode(p: PIIParams, z_far: complex, z_to: complex, tol: float = 1e-13, series=None):
    """Decaying solution of w'' = (x + 6 sigma B^2) w, carried from z_far to z_to.

    Normalised so that w ~ Ai(x) exp(2 sigma gamma^2 x^(-3/2)) at large |x|.
    """
    series = series or _SeriesY(p)
    sg2 = p.sigma * p.gamma ** 2
    ai, aip = airy_ai_complex(z_far)
    g = 2.0 * sg2 * z_far ** -1.5
    gp = -3.0 * sg2 * z_far ** -2.5
    eg = np.exp(g)
    w0 = np.array([ai * eg, (aip + ai * gp) * eg])
    six_sigma = 6.0 * p.sigma

    def lin(x, W):
        b = series(x)[0]
        return np.array([W[1], (x + six_sigma * b * b) * W[0]])

    sol = dop853.solve(_along(lin, z_far, z_to), 0.0, w0, 1.0, rtol=tol, atol=tol)
    if sol.status != "completed":
        raise ToleranceError(f"decaying-mode solve ended with {sol.status}")
    return sol.y_last, sol.n_steps


def init_ray(p: PIIParams, cfg: RayConfig = RayConfig()) -> RayInit:
    """Real state at ``cfg.x_real`` built from the complex ray arg x = cfg.angle."""
    rot = complex(math.cos(cfg.angle), math.sin(cfg.angle))
    zc, zf = cfg.radius * rot, cfg.far * rot
    series = _SeriesY(p)
    w, n_lin = decaying_mode(p, zf, zc, cfg.tol, series)
    b, bp, trunc = series(zc)
    J = math.sin(math.pi * p.gamma) if p.sigma > 0 else math.sinh(math.pi * p.gamma)
    c = complex(p.kappa, J)
    y0 = np.array([b, bp]) + c * w
    f = rhs_real(p.sigma, p.gamma)
    sol = dop853.solve(_along(f, zc, complex(cfg.x_real)), 0.0, y0, 1.0, rtol=cfg.tol, atol=cfg.tol)
    if sol.status != "completed":
        raise ToleranceError(f"complex-ray solve ended with {sol.status}")
    y = sol.y_last
    imag = float(np.max(np.abs(y.imag)))
    unit = p.unit
    state = State(float(cfg.x_real), unit * y[0].real, unit * y[1].real)
    return RayInit(state, imag, trunc, n_lin + sol.n_steps)


# ---------------------------------------------------------------------------
# integration along the real line


def _status_from(sol: dop853.Solution) -> Status:
    if sol.status == "completed":
        return Completed()
    if sol.status == "stopped":
        return PoleDetected(float(sol.t_stop))
    if sol.status == "step_floor" and abs(sol.y_last[0]) > POLE_AT_FLOOR:
        return PoleDetected(float(sol.t_last))
    return ToleranceFailure(float(sol.t_last), sol.message)


def sample_grid(x_start: float, x_end: float, dx: float) -> np.ndarray:
    """Decreasing grid from x_start with spacing dx, always ending at x_end."""
    n = int(math.floor((x_start - x_end) / dx + 1e-9))
    xs = x_start - dx * np.arange(n + 1)
    if xs[-1] > x_end:
        xs = np.append(xs, x_end)
    return xs


def integrate(
    p: PIIParams,
    x_start: float,
    x_end: float,
    init: State,
    tol: float = 1e-11,
    sample_x: Optional[Sequence[float]] = None,
    dx: float = 0.05,
) -> Trajectory:
    """Adaptive DOP853 toward -infinity in the family's real variable.

    Samples are ``sample_x`` (decreasing) or a grid of spacing ``dx``. The run
    stops with ``PoleDetected`` once |u| > 1e6 or when the step collapses below
    1e-12 while |u| > 100; any other collapse is a ``ToleranceFailure``.
    """
    if not x_start > x_end:
        raise ValueError("integration runs toward -infinity: need x_start > x_end")
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise ValueError(f"tol must lie in [{TOL_RANGE[0]}, {TOL_RANGE[1]}], got {tol}")
    xs = sample_grid(x_start, x_end, dx) if sample_x is None else np.asarray(sample_x, dtype=float)
    if len(xs) > 1 and not np.all(np.diff(xs) < 0):
        raise ValueError("sample_x must be strictly decreasing")
    y0 = _state_to_y(p, State(x_start, init.u, init.up))
    f = rhs_real(p.sigma, p.gamma)
    sol = dop853.solve(
        f, x_start, y0, x_end, rtol=tol, atol=tol, sample_t=xs,
        stop=lambda t, y: abs(y[0]) > POLE_THRESHOLD, h_floor=STEP_FLOOR,
    )
    ys = sol.y if len(sol.t) else np.empty((0, 2))
    return Trajectory(
        p, np.asarray(sol.t, dtype=float), ys[:, 0].copy(), ys[:, 1].copy(), tol,
        StepStats(sol.h_min, sol.h_max, sol.n_steps, sol.n_rejected), _status_from(sol),
        {"x_last": sol.t_last},
    )


@dataclass(frozen=True)
class InitConfig:
    """How the +infinity end is pinned down.

    ``method``: "series" (B + k Ai at x0), "ray" (complex-ray start joined to a
    series-started piece above ``ray.x_real``) or "auto" (series when alpha = 0,
    where B vanishes and k Ai is exact to O(k^3 Ai^3), ray otherwise).
    """

    method: str = "auto"
    ray: RayConfig = RayConfig()

    def resolve(self, p: PIIParams) -> str:
        if self.method not in ("auto", "series", "ray"):
            raise ValueError(f"unknown init method {self.method!r}")
        if self.method == "auto":
            return "series" if p.alpha == 0 else "ray"
        return self.method


def solve_as(
    p: PIIParams,
    x0: float = 15.0,
    x_end: float = -150.0,
    tol: float = 1e-11,
    sample_x: Optional[Sequence[float]] = None,
    dx: float = 0.05,
    init: InitConfig = InitConfig(),
) -> Trajectory:
    """AS trajectory on [x_end, x0] with samples ``sample_x`` or spacing ``dx``."""
    xs = sample_grid(x0, x_end, dx) if sample_x is None else np.asarray(sample_x, dtype=float)
    method = init.resolve(p)
    if p.is_trivial:
        z = np.zeros(len(xs))
        return Trajectory(p, xs.copy(), z, z.copy(), tol, StepStats(0.0, 0.0, 0), Completed(), {"init": method})
    if method == "series" or x_end >= init.ray.x_real:
        tr = integrate(p, x0, x_end, init_plus(p, x0), tol, xs)
        tr.meta["init"] = "series"
        return tr

    xm = init.ray.x_real
    upper = integrate(p, x0, xm, init_plus(p, x0), tol, np.append(xs[xs > xm], xm))
    ri = init_ray(p, init.ray)
    lower = integrate(p, xm, x_end, ri.state, tol, np.concatenate([[xm], xs[xs < xm]]))
    up_mask = upper.x > xm
    lo_mask = np.ones(len(lower.x), bool) if np.any(xs == xm) else lower.x < xm
    x = np.concatenate([upper.x[up_mask], lower.x[lo_mask]])
    y = np.concatenate([upper.y[up_mask], lower.y[lo_mask]])
    yp = np.concatenate([upper.yp[up_mask], lower.yp[lo_mask]])
    status = upper.status if not isinstance(upper.status, Completed) else lower.status
    gap = float(abs(upper.y[-1] - ri.state.u / p.unit)) if isinstance(upper.status, Completed) else math.nan
    stats = StepStats(
        min(upper.step_stats.h_min, lower.step_stats.h_min),
        max(upper.step_stats.h_max, lower.step_stats.h_max),
        upper.step_stats.n_steps + lower.step_stats.n_steps + ri.n_steps,
        upper.step_stats.n_rejected + lower.step_stats.n_rejected,
    )
    meta = {"init": "ray", "join_x": xm, "join_gap": gap, "ray_imag_residual": ri.imag_residual,
            "ray_truncation": ri.truncation, "x_last": lower.meta["x_last"]}
    return Trajectory(p, x, y, yp, tol, stats, status, meta)


# ---------------------------------------------------------------------------
# fixed-step order check


def observed_orders(p: PIIParams, init: State, x_start: float, x_end: float, n_steps: Sequence[int]):
    """Convergence orders log2(e_n / e_2n) of fixed-step DOP853 at x_end.

    e_n is measured against a fixed-step run with 16 times the largest n.
    """
    y0 = _state_to_y(p, init)
    f = rhs_real(p.sigma, p.gamma)
    ns = sorted(set(n_steps) | {2 * n for n in n_steps})
    ref = dop853.solve_fixed(f, x_start, y0, x_end, 16 * ns[-1])
    err = {n: float(np.max(np.abs(dop853.solve_fixed(f, x_start, y0, x_end, n) - ref))) for n in ns}
    return [math.log2(err[n] / err[2 * n]) for n in sorted(n_steps)]
