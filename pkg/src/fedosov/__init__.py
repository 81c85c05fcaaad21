"""Exact Fedosov star products in Darboux coordinates."""

from .forms import DivisionByH, WeylForm
from .pipeline import ConnectionData, FedosovStar, StarResult, star, star_full
from .scalar import GaussianRational, ParseError, ScalarCoeff, parse_expr, render_expr
from .weyl import WeylElement, circ

__all__ = [
    "ConnectionData",
    "DivisionByH",
    "FedosovStar",
    "GaussianRational",
    "ParseError",
    "ScalarCoeff",
    "StarResult",
    "WeylElement",
    "WeylForm",
    "circ",
    "parse_expr",
    "render_expr",
    "star",
    "star_full",
]
