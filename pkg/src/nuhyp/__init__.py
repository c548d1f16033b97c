"""Numerical toolkit for Pliss times, cocycle hyperbolicity, weak* distances
and homoclinic relations on a few model surface maps."""

__version__ = "0.1.0"
