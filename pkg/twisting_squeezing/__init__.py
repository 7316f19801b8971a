"""Twisting-tensor simulation of quadratic spin squeezing."""

__version__ = "0.1.0"
