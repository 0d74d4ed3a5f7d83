"""Pole-free decaying solutions of Painleve II, real and purely imaginary:
connection formulas and their numerical verification."""

from .connection import (
    ConnectionData,
    Family,
    PIIParams,
    StokesTriple,
    connection_imag,
    connection_real,
    nu_exponent,
    oscillatory_leading_term,
    stokes_from_params,
)
from .asymp_series import SeriesCoeffs, eval_B, eval_B_derivs, series_coeffs
from .pii_ode import State, Trajectory, init_plus, init_ray, integrate, pii_residual, lax_compatibility, solve_as
from .specfun import AiryValue, airy_ai, arg_gamma_imag, log_gamma
from .verifier import FitResult, VerificationReport, VerifyConfig, fit_oscillation, scan_pole_free, verify_connection, verify_plus

__version__ = "0.1.0"
