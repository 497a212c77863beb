"""Feasibility of branch constraint systems."""

from .interval import poly_feasible
from .lp import InternalError, NonlinearSystem, lp_feasible, lp_optimize
from .poly import Poly, as_poly
from .smtlib import export_smtlib, parse_smtlib
from .system import (EQ, LE, LT, BasisTooLarge, CoherenceBlock, ConstraintSystem,
                     Feasibility, Row, Status, build_coherence)

__all__ = [
    "EQ", "LE", "LT", "BasisTooLarge", "CoherenceBlock", "ConstraintSystem",
    "Feasibility", "InternalError", "NonlinearSystem", "Poly", "Row", "Status",
    "as_poly", "build_coherence", "export_smtlib", "lp_feasible", "lp_optimize",
    "parse_smtlib", "poly_feasible",
]
