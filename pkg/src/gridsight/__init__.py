"""Visibility in grid worlds: modular posets, widths, lattice antichains and chain covers."""

__version__ = "0.1.0"
