"""Large-x power series B(alpha; x) ~ (alpha/x) sum a_n x^(-3n).

Coefficients follow

    a_0 = 1,  a_{n+1} = (3n+1)(3n+2) a_n - 2 alpha^2 sum_{k+l+m=n} a_k a_l a_m,

which is what matching powers of x^-3 in u'' = 2u^3 + xu - alpha forces.
The series diverges (a_n grows like 9^n (n!)^2), so evaluation defaults to
optimal truncation at the smallest term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .specfun import DomainError

X_MIN = 8.0
SATURATION = 1e300
N_SEARCH = 70

Mode = Union[str, int]


@dataclass(frozen=True)
class SeriesCoeffs:
    alpha: complex
    coeffs: tuple
    saturated: bool = False

    def __len__(self) -> int:
        return len(self.coeffs)


def _alpha_squared(alpha: complex):
    alpha = complex(alpha)
    a2 = alpha * alpha
    # real and purely imaginary alpha give a real alpha^2
    if alpha.imag == 0.0 or alpha.real == 0.0:
        return a2.real
    return a2


@lru_cache(maxsize=256)
def _coeffs_cached(alpha2, n_max: int) -> tuple[tuple, bool]:
    a = [1.0 if isinstance(alpha2, float) else 1.0 + 0j]
    sq = [a[0] * a[0]]  # sq[n] = sum_{l+m=n} a_l a_m
    for n in range(n_max):
        cube = sum(a[k] * sq[n - k] for k in range(n + 1))
        nxt = (3 * n + 1) * (3 * n + 2) * a[n] - 2.0 * alpha2 * cube
        if not abs(nxt) < SATURATION:
            return tuple(a), True
        a.append(nxt)
        sq.append(sum(a[l] * a[n + 1 - l] for l in range(n + 2)))
    return tuple(a), False


def series_coeffs(alpha: complex, n_max: int) -> SeriesCoeffs:
    """a_0 .. a_{n_max}; stops early with ``saturated=True`` past 1e300."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    coeffs, sat = _coeffs_cached(_alpha_squared(alpha), int(n_max))
    return SeriesCoeffs(complex(alpha), coeffs, sat)


def _terms(alpha, x, coeffs, order: int):
    """Terms of d^order/dx^order of (alpha/x) a_n x^(-3n)."""
    out = []
    inv3 = x ** -3
    p = alpha / x ** (order + 1)
    for n, a in enumerate(coeffs):
        e = 3 * n + 1
        if order == 0:
            f = 1.0
        elif order == 1:
            f = -e
        else:
            f = e * (e + 1)
        out.append(f * a * p)
        p = p * inv3
    return out


def _truncation_index(base_terms, mode: Mode) -> int:
    if mode == "optimal":
        mags = [abs(t) for t in base_terms]
        n = 0
        while n + 1 < len(mags) and mags[n + 1] < mags[n]:
            n += 1
        return n
    if isinstance(mode, int) and not isinstance(mode, bool) and mode >= 0:
        return mode
    raise ValueError(f"mode must be 'optimal' or a non-negative int, got {mode!r}")


def _evaluate(alpha: complex, x, mode: Mode):
    alpha = complex(alpha)
    if alpha == 0:
        return 0.0, 0.0, 0.0, 0.0
    n_need = N_SEARCH if mode == "optimal" else int(mode) + 1
    sc = series_coeffs(alpha, n_need)
    a = sc.coeffs
    base = _terms(alpha, x, a, 0)
    n = _truncation_index(base, mode)
    if n >= len(a):
        raise DomainError(f"only {len(a)} coefficients before saturation; fixed({n}) unavailable")
    err = abs(base[n + 1]) if n + 1 < len(base) else math.inf
    d1 = _terms(alpha, x, a[: n + 1], 1)
    d2 = _terms(alpha, x, a[: n + 1], 2)
    vals = (sum(base[: n + 1]), sum(d1), sum(d2))
    if isinstance(x, float) and alpha.imag == 0.0:
        vals = tuple(v.real for v in vals)
    return vals[0], vals[1], vals[2], err


def _check_x(x) -> float:
    x = float(x)
    if not x >= X_MIN:
        raise DomainError(f"series evaluation needs x >= {X_MIN}, got {x!r}")
    return x


def eval_B(alpha: complex, x: float, mode: Mode = "optimal") -> tuple[complex, float]:
    """Partial sum of B(alpha; x) and the magnitude of the first omitted term."""
    b, _, _, err = _evaluate(alpha, _check_x(x), mode)
    return b, err


def eval_B_derivs(alpha: complex, x: float, mode: Mode = "optimal"):
    """(B, B', B'', err_est) with a common truncation index."""
    return _evaluate(alpha, _check_x(x), mode)


def eval_B_derivs_complex(alpha: complex, z: complex, mode: Mode = "optimal"):
    """Same as :func:`eval_B_derivs` at a complex point with |z| >= 8."""
    z = complex(z)
    if abs(z) < X_MIN:
        raise DomainError(f"series evaluation needs |z| >= {X_MIN}, got {z!r}")
    return _evaluate(alpha, z, mode)
