"""Semiclassical and quantum spatial densities in a disk billiard."""

__version__ = "0.1.0"
