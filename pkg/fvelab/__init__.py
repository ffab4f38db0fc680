"""Finite volume element schemes for 1D two-point boundary value problems"""

__version__ = "1.0.0"
