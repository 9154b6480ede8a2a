"""Jet Riemann-Lagrange geometry of first-order ODE systems."""

from .errors import (
    CurveError,
    DomainError,
    EvalError,
    JetGeoError,
    MetricError,
    ParseError,
    SystemSpecError,
    UnboundSymbolError,
)
from .expr import Expr, diff, evaluate, parse
from .jetcore import GeometryReport, JetPoint, full_report
from .metric import MetricPair
from .systems import SystemSpec, build_generic, build_linear, build_nhlsode, build_sode

__all__ = [
    "CurveError",
    "DomainError",
    "EvalError",
    "Expr",
    "GeometryReport",
    "JetGeoError",
    "JetPoint",
    "MetricError",
    "MetricPair",
    "ParseError",
    "SystemSpec",
    "SystemSpecError",
    "UnboundSymbolError",
    "build_generic",
    "build_linear",
    "build_nhlsode",
    "build_sode",
    "diff",
    "evaluate",
    "full_report",
    "parse",
]

__version__ = "0.1.0"
