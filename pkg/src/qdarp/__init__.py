"""Chirped spectral-hole pulse driving of a two-level emitter."""

__version__ = "0.1.0"
