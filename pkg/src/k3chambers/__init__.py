"""Exact-arithmetic lattice computations for K3 surface automorphism groups."""

__version__ = "0.1.0"
