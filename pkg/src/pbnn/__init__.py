"""Permutation binary neural networks: simulation, orbit analysis, GBPO search, HDL emission."""

__version__ = "0.1.0"
