"""Verification workbench for the exponential and character sums of a GL(3) x Dirichlet twist."""

__version__ = "0.1.0"
