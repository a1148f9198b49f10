"""Construction and desk-scale verification of 3-query LCC lower-bound objects."""

__version__ = "0.1.0"
