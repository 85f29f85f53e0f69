"""Ergonomic interaction workspace analysis for dual-arm master manipulators."""
__version__ = "0.1.0"
