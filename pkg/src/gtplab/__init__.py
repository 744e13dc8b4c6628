"""gtplab: formal power series laboratory for billiard inverse problems with a twist normal form."""
from .errors import (ConfigurationError, ConsistencyError, DegenerateError, DomainError,
                     GtpError, ResonanceError)
from .series import (DEFAULT_PRECISION, BiSeries, Coeff, UniSeries, compose_bi_into_uni,
                     cos_offset_coeffs, default_precision, mul, revert, trig_half_series,
                     workprec)
from .solver import (GtpSolution, GtpState, ProblemParams, init_q2, key_combination,
                     quadratic_phi_closed_form, residual, solve, step)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "ConsistencyError", "DegenerateError", "DomainError", "GtpError",
    "ResonanceError", "DEFAULT_PRECISION", "BiSeries", "Coeff", "UniSeries",
    "compose_bi_into_uni", "cos_offset_coeffs", "default_precision", "mul", "revert",
    "trig_half_series", "workprec", "GtpSolution", "GtpState", "ProblemParams", "init_q2",
    "key_combination", "quadratic_phi_closed_form", "residual", "solve", "step",
]
