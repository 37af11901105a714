"""Numerical certificates for unital quantum channels: Werner-Holevo channels,
twirling, exact factorizations, and mixed-unitary decompositions of tensor powers."""

__version__ = "0.1.0"
