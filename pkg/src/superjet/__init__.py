"""Exact computations with graded differential polynomials on jet superspaces."""

__version__ = "0.1.0"
