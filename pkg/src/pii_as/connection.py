"""Stokes data, the exponent nu and the +infinity -> -infinity connection map.

Two solution families are supported:

* ``Family.REAL``: alpha in (-1/2, 1/2), k real with |k| < cos(pi alpha);
  u(x) ~ d (-x)^(-1/4) cos(theta(x) + phi) as x -> -inf, d > 0.
* ``Family.IMAG``: alpha and k purely imaginary; u(x) ~ d (-x)^(-1/4)
  sin(theta(x) + phi) with d purely imaginary.

Here theta(x) = (2/3)(-x)^(3/2) - (3/4) d^2 ln(-x).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Union

from .specfun import DomainError, arg_gamma_imag, log_gamma

TWO_PI = 2.0 * math.pi
LN2 = math.log(2.0)


class Family(str, enum.Enum):
    REAL = "real"
    IMAG = "imag"


class InvalidParams(ValueError):
    """Parameters violate the family rules (type or admissible region)."""


class DegenerateParams(InvalidParams):
    """alpha = k = 0: the solution is identically zero."""


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidParams(f"non-finite parameter {z!r}")
    return z


@dataclass(frozen=True)
class PIIParams:
    """(alpha, k) with a family tag.

    Construction only enforces the representation (real vs purely imaginary);
    :meth:`check_admissible` additionally enforces the AS region. Keeping the
    two apart lets pole scans integrate singular parameters such as k = 1.2.
    """

    alpha: complex
    k: complex
    family: Family = Family.REAL

    def __post_init__(self):
        a, k = _as_complex(self.alpha), _as_complex(self.k)
        fam = Family(self.family)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "family", fam)
        if fam is Family.REAL and (a.imag != 0.0 or k.imag != 0.0):
            raise InvalidParams(f"real family needs real alpha and k, got {a}, {k}")
        if fam is Family.IMAG and (a.real != 0.0 or k.real != 0.0):
            raise InvalidParams(f"imaginary family needs imaginary alpha and k, got {a}, {k}")

    @classmethod
    def real(cls, alpha: float, k: float) -> "PIIParams":
        return cls(complex(alpha), complex(k), Family.REAL)

    @classmethod
    def imag(cls, beta: float, kappa: float) -> "PIIParams":
        """alpha = i beta, k = i kappa."""
        return cls(complex(0.0, beta), complex(0.0, kappa), Family.IMAG)

    # Real-variable view: y'' = 2 sigma y^3 + x y - gamma, with u = y (real)
    # or u = i y (imaginary family).
    @property
    def sigma(self) -> float:
        return 1.0 if self.family is Family.REAL else -1.0

    @property
    def gamma(self) -> float:
        return self.alpha.real if self.family is Family.REAL else self.alpha.imag

    @property
    def kappa(self) -> float:
        return self.k.real if self.family is Family.REAL else self.k.imag

    @property
    def unit(self) -> complex:
        """u = unit * y."""
        return 1.0 if self.family is Family.REAL else 1j

    @property
    def is_trivial(self) -> bool:
        return self.alpha == 0 and self.k == 0

    @property
    def admissible(self) -> bool:
        if self.family is Family.IMAG:
            return True
        a = self.alpha.real
        return abs(a) < 0.5 and abs(self.k.real) < math.cos(math.pi * a)

    def check_admissible(self) -> "PIIParams":
        if self.family is Family.REAL:
            a = self.alpha.real
            if not abs(a) < 0.5:
                raise InvalidParams(f"real family needs |alpha| < 1/2, got {a}")
            bound = math.cos(math.pi * a)
            if not abs(self.k.real) < bound:
                raise InvalidParams(f"|k| must be below cos(pi alpha) = {bound:.17g}, got {self.k.real}")
        return self


@dataclass(frozen=True)
class StokesTriple:
    s1: complex
    s2: complex
    s3: complex

    def constraint_residual(self, alpha: complex) -> float:
        """|s1 - s2 + s3 + s1 s2 s3 + 2 sin(pi alpha)|."""
        s1, s2, s3 = self.s1, self.s2, self.s3
        return abs(s1 - s2 + s3 + s1 * s2 * s3 + 2.0 * cmath.sin(math.pi * complex(alpha)))


@dataclass(frozen=True)
class ConnectionData:
    d: complex
    phi: float
    nu: complex

    @property
    def d2(self) -> float:
        """d^2 (positive for the real family, negative for the imaginary one)."""
        return (self.d * self.d).real


@dataclass(frozen=True)
class TrivialConnection:
    """Connection data of the zero solution: there is no amplitude or phase."""

    trivial: bool = True


def reduce_phase(phi: float) -> float:
    """Map to (-pi, pi]."""
    r = math.remainder(phi, TWO_PI)
    return math.pi if r == -math.pi else r


def circular_distance(a: float, b: float) -> float:
    return abs(math.remainder(a - b, TWO_PI))


def _sin_pi(alpha: complex) -> complex:
    if alpha.imag == 0.0:
        return complex(math.sin(math.pi * alpha.real), 0.0)
    if alpha.real == 0.0:
        return complex(0.0, math.sinh(math.pi * alpha.imag))
    return cmath.sin(math.pi * alpha)


def stokes_from_params(p: PIIParams) -> StokesTriple:
    """s1 = -sin(pi alpha) - i k, s2 = 0, s3 = -sin(pi alpha) + i k."""
    p.check_admissible()
    sp = _sin_pi(p.alpha)
    return StokesTriple(-sp - 1j * p.k, 0j, -sp + 1j * p.k)


def nu_exponent(s: StokesTriple) -> complex:
    """nu = -ln(1 - s1 s3) / (2 pi i), principal log."""
    p = s.s1 * s.s3
    q = 1.0 - p
    if abs(q.imag) > 1e-12 * max(1.0, abs(q.real)) or not q.real > 0.0:
        raise DomainError(f"1 - s1 s3 = {q} is not real positive")
    return -math.log1p(-p.real) / (2j * math.pi)


def _phase(d2: float, s1: complex) -> float:
    return reduce_phase(
        -1.5 * d2 * LN2 + arg_gamma_imag(0.5 * d2) - 0.25 * math.pi - math.atan2(s1.imag, s1.real)
    )


def connection_real(alpha: float, k: float) -> ConnectionData:
    p = PIIParams.real(alpha, k).check_admissible()
    if p.is_trivial:
        raise DegenerateParams("alpha = k = 0 gives the zero solution")
    # cos^2 - k^2 = 1 - (sin^2 + k^2), kept accurate for small parameters
    d2 = -math.log1p(-(math.sin(math.pi * alpha) ** 2 + k * k)) / math.pi
    if d2 == 0.0:
        raise DegenerateParams(f"amplitude underflows at alpha = {alpha!r}, k = {k!r}")
    s1 = complex(-math.sin(math.pi * alpha), -k)
    nu = nu_exponent(stokes_from_params(p))
    return ConnectionData(complex(math.sqrt(d2), 0.0), _phase(d2, s1), nu)


def connection_imag(alpha: complex, k: complex) -> ConnectionData:
    """alpha, k purely imaginary (complex inputs, e.g. 0.3j)."""
    alpha, k = complex(alpha), complex(k)
    p = PIIParams(alpha, k, Family.IMAG)
    if p.is_trivial:
        raise DegenerateParams("alpha = k = 0 gives the zero solution")
    # cosh^2(pi i alpha) + |k|^2 = 1 + sinh^2(pi Im alpha) + |k|^2
    dsq = math.log1p(math.sinh(math.pi * alpha.imag) ** 2 + abs(k) ** 2) / math.pi
    if dsq == 0.0:
        raise DegenerateParams(f"amplitude underflows at alpha = {alpha!r}, k = {k!r}")
    d = 1j * math.sqrt(dsq)
    d2 = (d * d).real
    # the last phase term as written for this family: -arg(-ik + i sinh(pi i alpha))
    w = -1j * k + 1j * cmath.sinh(math.pi * 1j * alpha)
    nu = nu_exponent(stokes_from_params(p))
    return ConnectionData(d, _phase(d2, w), nu)


def connection(p: PIIParams) -> Union[ConnectionData, TrivialConnection]:
    if p.is_trivial:
        return TrivialConnection()
    if p.family is Family.REAL:
        return connection_real(p.alpha.real, p.k.real)
    return connection_imag(p.alpha, p.k)


def homogeneous_connection(p: PIIParams) -> ConnectionData:
    """Classical alpha = 0 formulas, kept as an independent route.

    Real: d^2 = -ln(1 - k^2)/pi, phi = -(3/2) d^2 ln 2 + arg Gamma(i d^2/2)
    + (pi/2) sgn k - pi/4.  Imaginary: d^2 = -ln(1 + |k|^2)/pi with the same
    phase minus the sgn term. The imaginary version carries no sign of k, so it
    only agrees with :func:`connection_imag` for Im k > 0 (for Im k < 0 the two
    differ by pi, i.e. by the overall sign of u).
    """
    if p.alpha != 0:
        raise InvalidParams("homogeneous formulas need alpha = 0")
    if p.is_trivial:
        raise DegenerateParams("alpha = k = 0 gives the zero solution")
    if p.family is Family.REAL:
        k = p.k.real
        if not abs(k) < 1.0:
            raise InvalidParams("homogeneous real family needs |k| < 1")
        d2 = -math.log1p(-k * k) / math.pi
        phi = -1.5 * d2 * LN2 + log_gamma(0.5j * d2).imag + math.copysign(0.5 * math.pi, k) - 0.25 * math.pi
        d = complex(math.sqrt(d2), 0.0)
    else:
        d2 = -math.log1p(abs(p.k) ** 2) / math.pi
        phi = -1.5 * d2 * LN2 + log_gamma(0.5j * d2).imag - 0.25 * math.pi
        d = 1j * math.sqrt(-d2)
    return ConnectionData(d, reduce_phase(phi), -0.5j * d2)


def closed_form_term(x: float, p: PIIParams, data: ConnectionData) -> complex:
    """d (-x)^(-1/4) cos(theta + phi) (real family) or the sin form (imaginary)."""
    X = -x
    arg = (2.0 / 3.0) * X ** 1.5 - 0.75 * data.d2 * math.log(X) + data.phi
    trig = math.cos(arg) if p.family is Family.REAL else math.sin(arg)
    return data.d * X ** -0.25 * trig


def _bracket_terms(x: float, p: PIIParams, s: StokesTriple, nu: complex):
    X = -x
    phase = 1j * (2.0 / 3.0) * X ** 1.5 + nu * math.log(8.0 * X ** 1.5) - 0.25j * math.pi
    pre = math.sqrt(math.pi) * cmath.exp(-0.5j * math.pi * nu)
    t1 = pre * cmath.exp(phase - log_gamma(nu)) / s.s1
    t2 = pre * cmath.exp(-phase - log_gamma(-nu)) / s.s3
    return t1, t2


def oscillatory_leading_term(x: float, p: PIIParams, form: str = "two_term") -> complex:
    """Leading oscillatory term at x < 0 written with Gamma(nu) and Stokes data.

    ``form="two_term"`` sums both exponentials; ``form="reduced"`` uses the
    projected form 2 (-x)^(-1/4) Re{first} (real family) or
    2 i (-x)^(-1/4) Im{first} (imaginary family).
    """
    if not x < 0:
        raise DomainError(f"oscillatory term needs x < 0, got {x!r}")
    if p.is_trivial:
        return 0j
    s = stokes_from_params(p)
    nu = nu_exponent(s)
    t1, t2 = _bracket_terms(x, p, s, nu)
    scale = (-x) ** -0.25
    if form == "two_term":
        return scale * (t1 + t2)
    if form == "reduced":
        if p.family is Family.REAL:
            return complex(2.0 * scale * t1.real, 0.0)
        return complex(0.0, 2.0 * scale * t1.imag)
    raise ValueError(f"unknown form {form!r}")
