"""Probabilistic object anchoring with a distributional-clause reasoner."""

__version__ = "0.1.0"
