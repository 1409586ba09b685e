"""Singular integral equations for exterior Poincare problems of elliptic systems."""

from .errors import (
    DegenerateCurve,
    DimensionMismatch,
    InvalidOrder,
    MomentViolation,
    NotElliptic,
    NotNormal,
    PhaseResolutionExceeded,
    PoincareError,
    SolvabilityViolated,
    StencilCrossesBoundary,
    TooCloseToBoundary,
    Unsolvable,
)
from .geometry import CurveParametrization, EllipticCoefficients, TrigSeries
from .decomposable import FieldSolution, PoincareProblem, assemble, solve_poincare, vekua_reconstruct

__all__ = [
    "CurveParametrization",
    "DegenerateCurve",
    "DimensionMismatch",
    "EllipticCoefficients",
    "FieldSolution",
    "InvalidOrder",
    "MomentViolation",
    "NotElliptic",
    "NotNormal",
    "PhaseResolutionExceeded",
    "PoincareError",
    "PoincareProblem",
    "SolvabilityViolated",
    "StencilCrossesBoundary",
    "TooCloseToBoundary",
    "TrigSeries",
    "Unsolvable",
    "assemble",
    "solve_poincare",
    "vekua_reconstruct",
]
