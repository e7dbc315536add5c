"""Explicit zero-free forms of prime degree over p-adic stages, with certificates."""

__version__ = "0.1.0"
