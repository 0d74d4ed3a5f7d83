"""Airy function on the right half-line and the complex log-Gamma function."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

AIRY_X_MIN = 8.0

_SQRT_PI = math.sqrt(math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)

# Bernoulli numbers B_2 .. B_30 as exact ratios (numerator, denominator)
_BERNOULLI = [
    (1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66), (-691, 2730), (7, 6),
    (-3617, 510), (43867, 798), (-174611, 330), (854513, 138),
    (-236364091, 2730), (8553103, 6), (-23749461029, 870), (8615841276005, 14322),
]
_STIRLING = [
    num / (den * (2 * k) * (2 * k - 1))
    for k, (num, den) in enumerate(_BERNOULLI, start=1)
]
_STIRLING_TERMS = 12
_SHIFT_TARGET = 16.0


class DomainError(ValueError):
    """Argument outside the supported domain of a kernel."""


class PoleError(DomainError):
    """Argument sits on a pole of Gamma."""


@dataclass(frozen=True)
class AiryValue:
    x: float
    ai: float
    ai_prime: float
    rel_err_est: float


def _airy_terms(zeta: complex, max_terms: int = 200):
    """Coefficients u_n, v_n times (-1/zeta)^n, stopping at the smallest term."""
    u = v = 1.0
    su, sv = 1.0 + 0j, 1.0 + 0j
    pw = 1.0 + 0j
    prev = 1.0
    for n in range(1, max_terms):
        u_next = u * (6 * n - 5) * (6 * n - 3) * (6 * n - 1) / ((2 * n - 1) * 216 * n)
        v_next = -u_next * (6 * n + 1) / (6 * n - 1)
        pw_next = -pw / zeta
        term = abs(u_next * pw_next)
        if term >= prev:
            return su, sv, term
        u, v, pw, prev = u_next, v_next, pw_next, term
        su += u * pw
        sv += v * pw
    return su, sv, prev


def _two_prod(a: float, b: float) -> tuple[float, float]:
    # Dekker: a * b = p + e exactly
    p = a * b
    c = 134217729.0 * a
    ah = c - (c - a)
    al = a - ah
    c = 134217729.0 * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _zeta_dd(x: float) -> tuple[float, float]:
    """(2/3) x^(3/2) as an unevaluated sum hi + lo."""
    s = math.sqrt(x)
    p, e = _two_prod(s, s)
    s_lo = ((x - p) - e) / (2.0 * s)
    x15, e15 = _two_prod(x, s)
    e15 += x * s_lo
    t = 2.0 / 3.0
    p, e = _two_prod(3.0, t)
    t_lo = ((2.0 - p) - e) / 3.0
    z, ez = _two_prod(x15, t)
    ez += x15 * t_lo + e15 * t
    hi = z + ez
    return hi, ez - (hi - z)


def airy_ai(x: float) -> AiryValue:
    """Ai(x) and Ai'(x) for x >= 8 from the optimally truncated large-x expansion."""
    if not x >= AIRY_X_MIN:
        raise DomainError(f"airy_ai supports x >= {AIRY_X_MIN}, got {x!r}")
    zeta, zeta_lo = _zeta_dd(x)
    su, sv, omitted = _airy_terms(zeta)
    # exp(-zeta) with zeta carried to ~32 digits: at x = 20, zeta ~ 60 and a
    # one-ulp error in zeta alone would cost 1e-14 relative in Ai
    pref = math.exp(-zeta) * (1.0 - zeta_lo) / (2.0 * _SQRT_PI)
    ai = pref * x ** -0.25 * su.real
    aip = -pref * x ** 0.25 * sv.real
    return AiryValue(x, ai, aip, omitted / abs(su.real))


def airy_ai_complex(z: complex) -> tuple[complex, complex]:
    """Asymptotic Ai, Ai' for complex z with |z| >= 8 and |arg z| < pi/2.

    Used for the decaying-mode normalisation off the real axis.
    """
    z = complex(z)
    if abs(z) < AIRY_X_MIN or abs(math.atan2(z.imag, z.real)) >= math.pi / 2:
        raise DomainError(f"airy_ai_complex needs |z| >= 8 and |arg z| < pi/2, got {z!r}")
    zeta = (2.0 / 3.0) * z ** 1.5
    su, sv, _ = _airy_terms(zeta)
    pref = cmath.exp(-zeta) / (2.0 * _SQRT_PI)
    return pref * z ** -0.25 * su, -pref * z ** 0.25 * sv


def _stirling(w: complex) -> complex:
    # (w - 1/2) log w - w + log(2 pi)/2 + sum B_2k / (2k (2k-1) w^(2k-1))
    inv = 1.0 / w
    inv2 = inv * inv
    acc = 0j
    for c in reversed(_STIRLING[:_STIRLING_TERMS]):
        acc = acc * inv2 + c
    return (w - 0.5) * cmath.log(w) - w + _HALF_LOG_2PI + acc * inv


def _log_gamma_right(z: complex) -> complex:
    # Re z >= 1/2: shift upward so Stirling converges, undo with principal logs.
    shift = max(0, math.ceil(_SHIFT_TARGET - z.real))
    if shift == 0:
        return _stirling(z)
    terms = [z + j for j in range(shift)]
    logs = complex(
        math.fsum(math.log(abs(t)) for t in terms),
        # math.atan2: cmath.phase raises on subnormal results
        math.fsum(math.atan2(t.imag, t.real) for t in terms),
    )
    return _stirling(z + shift) - logs


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma(z), cut along the non-positive real axis."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise PoleError(f"Gamma has a pole at {z.real!r}")
    if z.imag == 0.0 and z.real > 0.0:
        return complex(math.lgamma(z.real), 0.0)
    if z.real >= 0.5:
        return _log_gamma_right(z)
    # log G(z) = log pi - log sin(pi z) - log G(1 - z) + 2 pi i n, with the
    # integer n = sgn(Im z) floor(Re z / 2 + 1/4) restoring the principal branch.
    s = _sinpi(z)
    n = math.copysign(1.0, z.imag) * math.floor(0.5 * z.real + 0.25)
    return _LOG_PI - cmath.log(s) - _log_gamma_right(1.0 - z) + 2j * math.pi * n


def _sinpi(z: complex) -> complex:
    # sin(pi z) with Re z reduced to [-1/2, 1/2] exactly, so zeros stay accurate
    n = round(z.real)
    r = z.real - n
    sign = -1.0 if n % 2 else 1.0
    y = z.imag
    return complex(
        sign * math.sin(math.pi * r) * math.cosh(math.pi * y),
        sign * math.cos(math.pi * r) * math.sinh(math.pi * y),
    )


def arg_gamma_imag(y: float) -> float:
    """Im log Gamma(i y), continuous on each half-line y > 0 and y < 0."""
    if y == 0.0:
        raise DomainError("Gamma(0) is a pole")
    return log_gamma(complex(0.0, y)).imag


def gamma(z: complex) -> complex:
    return cmath.exp(log_gamma(z))
