"""Exactly solvable harmonic model of molecules under collective vibrational strong coupling."""

__version__ = "0.1.0"
