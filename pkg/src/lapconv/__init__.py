"""Empirical AMV-type graph Laplacians on compact metric measure spaces."""
from ._accel import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
