"""Numerics for l1-norm coherence superadditivity bounds on qubit registers."""

__version__ = "0.1.0"
