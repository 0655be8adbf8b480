"""Deciding simultaneous unboundedness for higher-order pushdown automata."""

__version__ = "0.1.0"
