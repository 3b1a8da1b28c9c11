"""Nonclassicality witnesses from joint measurements of two qubit observables."""
from jointwitness.version import __version__

__all__ = ["__version__"]
