"""Extremal cocycle growth of group actions on boundaries, in concrete models."""

__version__ = "0.1.0"
