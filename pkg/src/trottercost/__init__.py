"""Fault-tolerant cost estimates for Trotterized phase estimation of lattice fermions."""

__version__ = "0.1.0"
