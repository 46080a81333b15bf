"""Bounded model checker for a statically-typed subset of Python."""

__version__ = "0.1.0"
