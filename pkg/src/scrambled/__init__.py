"""Exact finite-depth construction and certification of scrambled Cantor sets."""

__version__ = "0.1.0"
