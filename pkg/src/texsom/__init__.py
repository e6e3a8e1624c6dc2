"""Texture-feature image classification with classical and class-constrained SOMs."""

from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
