"""Decomposition-based geometry of mixed quantum ensembles."""

__version__ = "0.1.0"
