"""Ginibre determinantal point process simulation and Poisson-approximation bounds."""

from ._dpplab import *  # noqa: F401,F403
