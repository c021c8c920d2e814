"""Poisson suspensions and stationary infinitely divisible processes."""

__version__ = "0.1.0"
