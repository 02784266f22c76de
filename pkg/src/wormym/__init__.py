"""Numerical laboratory for an equivariant field on a hyperbolic throat."""

__version__ = "0.1.0"
