"""Hyperfinite Fourier transform. Reports come back as plain dicts."""

from ._hftpy import ConfigError, ParseError, Session

__all__ = ["Session", "ParseError", "ConfigError"]
