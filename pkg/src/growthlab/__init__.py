"""Abel functions, the Xi tower and growth-rate classification of real functions."""

__version__ = "0.1.0"
