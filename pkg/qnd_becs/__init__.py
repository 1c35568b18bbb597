"""Simulation of QND-measurement-induced entanglement between two BECs."""

__version__ = "1.0.0"
