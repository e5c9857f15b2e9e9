"""Inland-vessel guidance, navigation and control simulation toolkit."""
from absim.kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
