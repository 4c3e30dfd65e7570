"""Numerical toolkit for G2-Strominger solutions on torus bundles over T^4."""

__version__ = "0.1.0"
