"""Exact scalar arithmetic: rationals, multivariate rational functions,
square-root towers, expression parsing, and truncated series expansion."""

from .context import (
    BranchPointError,
    Context,
    DivisionByZeroScalar,
    ExprError,
    ParameterDecl,
    Radical,
    RingModeViolation,
)
from .parser import ParseError, Parser, build_context, parse_expression
from .polynomial import MultiPoly, RatFunc, fraction_sqrt, poly_divexact, poly_gcd, poly_sqrt
from .series import laurent_coeffs, series_expand, value_at_zero
from .tower import TowerScalar, coerce, lift, tower_sqrt

__all__ = [
    "BranchPointError",
    "Context",
    "DivisionByZeroScalar",
    "ExprError",
    "MultiPoly",
    "ParameterDecl",
    "ParseError",
    "Parser",
    "Radical",
    "RatFunc",
    "RingModeViolation",
    "TowerScalar",
    "build_context",
    "coerce",
    "fraction_sqrt",
    "laurent_coeffs",
    "lift",
    "parse_expression",
    "poly_divexact",
    "poly_gcd",
    "poly_sqrt",
    "series_expand",
    "value_at_zero",
    "tower_sqrt",
]
