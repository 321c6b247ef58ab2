"""Desk-scale machinery for limit points of normalized prime gaps."""

__version__ = "0.1.0"
