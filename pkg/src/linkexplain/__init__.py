"""Explainable link prediction for property graphs."""

__version__ = "0.1.0"
