"""Exact, truncated computations with vertex operator algebras, their modules,
logarithmic intertwining operators, Zhu algebras and finite-dimensional
representation theory over the rationals."""

from .linalg import Rational, SparseMatrix, Vec, fmt_rational, parse_rational
from .modes import VOA, BoundExceeded, Field, Module, OutOfWindow, check_module_axioms, normal_product
from .models import build_model, module_from_descriptor
from .report import Report

__version__ = "0.1.0"

__all__ = [
    "Rational", "SparseMatrix", "Vec", "fmt_rational", "parse_rational",
    "VOA", "BoundExceeded", "Field", "Module", "OutOfWindow", "check_module_axioms", "normal_product",
    "build_model", "module_from_descriptor", "Report",
]
