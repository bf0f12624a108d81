"""Weighted Fekete points, reproducing kernels and Beurling-Landau densities."""

__version__ = "0.1.0"
