"""Toolkit for fermionic antiflatness and related non-Gaussianity measures."""

__version__ = "0.1.0"
