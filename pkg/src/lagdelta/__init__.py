"""Numerical laboratory for the delta(2,2) invariant on Lagrangian submanifolds."""

__version__ = "0.1.0"
