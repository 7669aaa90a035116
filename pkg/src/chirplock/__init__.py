"""Quantum and classical phase locking of a chirped anharmonic oscillator."""
from .params import DimensionlessParams, PhysicalParams, from_physical

__version__ = "0.1.0"

__all__ = ["DimensionlessParams", "PhysicalParams", "from_physical", "__version__"]
