"""Bayesian network structure learning by searching variable orderings as a
history-dependent traveling salesman problem."""

__version__ = "0.1.0"
