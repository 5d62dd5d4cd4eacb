"""Numerical laboratory for the free Schrodinger flow on Fourier-Lebesgue data."""

__version__ = "0.1.0"
