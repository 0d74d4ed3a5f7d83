"""Fast invariant checks across all modules (used by ``pii_as selftest``)."""

from __future__ import annotations

import cmath
import math

import numpy as np

from . import asymp_series, connection as conn, pii_ode, specfun, verifier
from .connection import PIIParams


def _random_params(rng, n):
    out = []
    for _ in range(n):
        a = rng.uniform(-0.45, 0.45)
        out.append(PIIParams.real(a, rng.uniform(-0.95, 0.95) * math.cos(math.pi * a)))
        out.append(PIIParams.imag(rng.uniform(-1, 1), rng.uniform(-3, 3)))
    return out


def run_selftest(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    results = []

    def check(name, value, bound):
        results.append((name, bool(value <= bound), f"{value:.3e} <= {bound:.0e}"))

    # specfun
    worst = 0.0
    for x in np.linspace(8.01, 20, 13):
        h = 1e-3
        f = [specfun.airy_ai(x + j * h).ai for j in (-2, -1, 0, 1, 2)]
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        worst = max(worst, abs(d2 - x * f[2]) / f[2])
    check("airy equation residual", worst, 1e-8)
    worst = 0.0
    for t in np.linspace(0.01, 3, 30):
        nu = 1j * t
        lhs = specfun.gamma(nu) * specfun.gamma(-nu)
        rhs = -math.pi / (nu * cmath.sin(math.pi * nu))
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    check("gamma reflection", worst, 1e-10)

    # series
    b, bp, bpp, err = asymp_series.eval_B_derivs(0.25, 15.0)
    check("series truncation at x=15", err, 1e-12)
    check("series ODE residual at x=15", abs(pii_ode.pii_residual(15.0, b, bpp, 0.25)), 1e-15)

    # connection identities
    d_nu = stokes = modulus = lead = 0.0
    for p in _random_params(rng, 20):
        c = conn.connection(p)
        s = conn.stokes_from_params(p)
        d_nu = max(d_nu, abs(c.d ** 2 - 2j * c.nu))
        stokes = max(stokes, s.constraint_residual(p.alpha))
        if p.family is conn.Family.REAL:
            g = abs(cmath.exp(-specfun.log_gamma(c.nu))) ** 2
            rhs = (1j * c.nu / (2 * math.pi) * cmath.exp(1j * math.pi * c.nu)).real * abs(s.s1) ** 2
            modulus = max(modulus, abs(g - rhs))
        for x in (-20.0, -50.0, -100.0):
            a = conn.oscillatory_leading_term(x, p)
            ref = conn.closed_form_term(x, p, c)
            lead = max(lead, abs(a - ref) / (abs(c.d) * (-x) ** -0.25))
    check("d^2 = 2 i nu", d_nu, 1e-12)
    check("Stokes constraint", stokes, 1e-14)
    check("Gamma modulus identity", modulus, 1e-10)
    check("leading term vs closed form", lead, 1e-10)

    # Lax pair
    worst = 0.0
    for _ in range(200):
        u, up, upp, al = (complex(*rng.normal(size=2)) for _ in range(4))
        lam = 10 ** rng.uniform(-1, 1) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        x = rng.uniform(-20, 20)
        M = pii_ode.lax_compatibility(x, u, up, upp, al, lam)
        R = pii_ode.pii_residual(x, u, upp, al)
        worst = max(worst, float(np.max(np.abs(M + 2 * R * pii_ode.SIGMA1))))
    check("Lax zero curvature", worst, 1e-12)

    # end to end
    for p in (PIIParams.real(0.0, 0.5), PIIParams.real(0.25, 0.3), PIIParams.imag(0.3, 0.5)):
        rep = verifier.verify_connection(p)
        results.append((
            f"verify {p.family.value} alpha={p.gamma:g} k={p.kappa:g}", rep.passed,
            f"err_d={rep.err_d_rel:.2e} err_phi={rep.err_phi_abs:.2e} {rep.message}".strip(),
        ))
    return results
