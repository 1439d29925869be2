"""Exact arithmetic foundation: rationals, multivariate polynomials, series, Q(sqrt D)."""

from .poly import (
    MultiPoly,
    Rat,
    Ring,
    RingMismatch,
    format_poly,
    grevlex_cmp,
    grevlex_key,
    parse_poly,
    ring_from_header,
    to_rat,
)
from .quadext import QuadExt, parse_point, parse_quad, sqrt_int
from .series import TruncSeries, series_compose, series_reverse

__all__ = [
    "MultiPoly",
    "QuadExt",
    "Rat",
    "Ring",
    "RingMismatch",
    "TruncSeries",
    "format_poly",
    "grevlex_cmp",
    "grevlex_key",
    "parse_point",
    "parse_poly",
    "parse_quad",
    "ring_from_header",
    "series_compose",
    "series_reverse",
    "sqrt_int",
    "to_rat",
]
