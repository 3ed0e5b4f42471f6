"""Stochastic Hessenberg operators from multiple-orthogonality weight systems."""

__version__ = "0.1.0"
