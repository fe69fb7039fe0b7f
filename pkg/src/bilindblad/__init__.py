"""Bi-Hamiltonian pencils, contact dissipation and bi-Lindblad quantum dynamics."""

__version__ = "0.1.0"
