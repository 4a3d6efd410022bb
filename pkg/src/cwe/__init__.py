"""Confidence-weighted expectation estimates and their classical baselines."""

__version__ = "0.1.0"
