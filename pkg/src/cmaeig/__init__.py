"""Eigenvalue problem for the complex Monge-Ampere operator on domains in C^2."""

__version__ = "0.1.0"
