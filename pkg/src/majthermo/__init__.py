"""Majorization, Renyi divergences and single-shot thermodynamics, classical and quantum."""

__version__ = "0.1.0"
