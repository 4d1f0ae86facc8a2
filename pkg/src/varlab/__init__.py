"""Numerical laboratory for variational inequalities of averages and semigroups."""

__version__ = "0.1.0"
