"""Robust CUR decompositions of low-rank plus sparse matrices."""

__version__ = "0.1.0"
