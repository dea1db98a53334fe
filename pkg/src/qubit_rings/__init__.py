"""Maximal nearest-neighbour concurrence of translationally invariant qubit rings."""

__version__ = "0.1.0"
