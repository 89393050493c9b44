"""Numerical laboratory for multiplication operators and multiplication semigroups."""

__version__ = "0.1.0"
