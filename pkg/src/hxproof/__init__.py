"""Proof kernel, model checker, and proof-search toolkit for a data-aware
hybrid path logic with node keys and endpoint data comparisons."""

__version__ = "0.1.0"
