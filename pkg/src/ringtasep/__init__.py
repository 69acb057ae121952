"""Exact and limiting one-point distributions of the periodic TASEP."""

__version__ = '0.1.0'
