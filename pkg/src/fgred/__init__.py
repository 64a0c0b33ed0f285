"""Compile Boolean formulas into LCS, regex matching and discrete Frechet instances."""

__version__ = "0.1.0"
