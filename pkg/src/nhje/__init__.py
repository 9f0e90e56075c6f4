"""Postselected non-Hermitian qubit dynamics and conditional Jarzynski statistics."""
__version__ = "0.1.0"
