"""Spectral analysis and forward simulation of over-smoothing in graph convolutions."""

__version__ = "0.1.0"
