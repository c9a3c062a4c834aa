"""Maximal propagation speed experiments for Lindblad dynamics on a 1-D lattice."""

__version__ = "0.1.0"
