"""Transition amplitudes of a two-level detector on accelerated worldlines."""

__version__ = "0.1.0"
