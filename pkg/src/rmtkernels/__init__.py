"""Kernels, transforms and sampling for biorthogonal random-matrix ensembles."""

from . import errors
from ._backend import name as backend

__version__ = "0.1.0"

__all__ = ["errors", "backend", "__version__"]
