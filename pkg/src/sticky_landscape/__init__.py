"""Geometrical free-energy landscapes of small clusters of sticky spheres."""

__version__ = "0.1.0"
