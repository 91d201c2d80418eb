"""Monte Carlo simulation of a body moving through falling rain or snow."""

__version__ = "0.1.0"
