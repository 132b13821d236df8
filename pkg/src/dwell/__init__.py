"""High-precision quartic oscillator and double-well solver."""

from .model import (
    EVEN,
    ODD,
    BracketError,
    DomainError,
    NumericalError,
    OscillatorParams,
    PoleError,
    QuadratureError,
    TrialParams,
    symanzik_rescale,
)
from .trial import TrialFunction

__all__ = [
    "EVEN",
    "ODD",
    "BracketError",
    "DomainError",
    "NumericalError",
    "OscillatorParams",
    "PoleError",
    "QuadratureError",
    "TrialFunction",
    "TrialParams",
    "symanzik_rescale",
]
__version__ = "0.1.0"
