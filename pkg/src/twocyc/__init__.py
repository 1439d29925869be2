"""Stability constants and 2-cyclicity certificates for orientation-reversing maps."""

__version__ = "0.1.0"
