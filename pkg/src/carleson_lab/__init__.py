"""Numerical laboratory for Carleson measures on the disc and on planar domains."""

__version__ = "0.1.0"
