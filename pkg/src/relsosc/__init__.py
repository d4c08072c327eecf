"""Relativistic linear singular oscillator: spectrum, SU(1,1) coherent states and path integrals."""
from .exceptions import (
    ConvergenceError,
    NumericalError,
    PoleError,
    RegimeError,
    RelsoscError,
    TruncationError,
    ValidationError,
)
from .model import ModelParams, SpectralParams, derive_spectral, energy

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "ModelParams",
    "NumericalError",
    "PoleError",
    "RegimeError",
    "RelsoscError",
    "SpectralParams",
    "TruncationError",
    "ValidationError",
    "__version__",
    "derive_spectral",
    "energy",
]
