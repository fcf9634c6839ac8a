"""Simulation and drift estimation for the fractional Ornstein-Uhlenbeck sheet."""

__version__ = "0.1.0"
