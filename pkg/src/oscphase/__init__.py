"""Weighted stationary-phase evaluation of oscillatory integrals.

The package evaluates integrals of g(x) * e(f(x)) over a finite interval,
where e(t) = exp(2*pi*i*t), by an nth-order stationary-phase expansion around
the single interior zero of f' (or by the boundary-only first-derivative test
when f' keeps one sign), and validates everything against a direct adaptive
Gauss-Legendre oracle.
"""

from .coefficients import (CoefficientSet, PhaseProblem, amplitude_series,
                           compute_coefficients, find_stationary_point,
                           recursion_coefficients, residual_Q, taylor_data)
from .expansion import (AuditReport, ExpansionResult, boundary_terms,
                        error_scale_terms, first_derivative_test,
                        hypothesis_audit, stationary_phase_expand)
from .exprs import eval_jet, eval_real, format_expr, parse
from .jets import (Jet, jet_arith, jet_compose, jet_differentiate,
                   jet_extract_derivative, jet_map, jet_revert, jet_variable)
from .oracle import (QuadratureSettings, fd_derivatives,
                     numeric_reversion_oracle, oscillatory_quadrature)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "CoefficientSet",
    "ExpansionResult",
    "Jet",
    "PhaseProblem",
    "QuadratureSettings",
    "amplitude_series",
    "boundary_terms",
    "compute_coefficients",
    "error_scale_terms",
    "eval_jet",
    "eval_real",
    "fd_derivatives",
    "find_stationary_point",
    "first_derivative_test",
    "format_expr",
    "hypothesis_audit",
    "jet_arith",
    "jet_compose",
    "jet_differentiate",
    "jet_extract_derivative",
    "jet_map",
    "jet_revert",
    "jet_variable",
    "numeric_reversion_oracle",
    "oscillatory_quadrature",
    "parse",
    "recursion_coefficients",
    "residual_Q",
    "stationary_phase_expand",
    "taylor_data",
]
