"""Spectral triples built from weighted discrete groups."""

__version__ = "0.1.0"
