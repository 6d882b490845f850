"""Counting flags of primitive sublattices of Z^n by height."""

__version__ = "0.1.0"
