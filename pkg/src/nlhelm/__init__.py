"""Spectral forward and inverse solvers for the axially symmetric nonlinear Helmholtz equation."""
__version__ = "0.1.0"
