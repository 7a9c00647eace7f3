"""Exact p-adic laboratory for two-parameter families of generalised Heegner classes."""

__version__ = "0.1.0"
