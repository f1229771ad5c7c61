"""Numerical laboratory for maximal inequalities in Triebel-Lizorkin spaces."""

__version__ = "0.1.0"
