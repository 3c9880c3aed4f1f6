"""Exact lattice and blow-down calculus for star-shaped curve configurations."""

from .curve_config import (
    Curve,
    CurveConfig,
    FamilyParams,
    IncidencePoint,
    SingularMark,
    cf_evaluate,
    cf_expand,
    make_family,
    total_intersection,
    validate,
)
from .errors import QhdError

__all__ = [
    "Curve",
    "CurveConfig",
    "FamilyParams",
    "IncidencePoint",
    "SingularMark",
    "QhdError",
    "cf_evaluate",
    "cf_expand",
    "make_family",
    "total_intersection",
    "validate",
]

__version__ = "0.1.0"
