"""Momentum observables on multiphase space and on the vertically adapted frame bundle."""

__version__ = "0.1.0"
