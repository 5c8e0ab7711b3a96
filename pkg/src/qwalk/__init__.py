"""Open and coined quantum walks on the line: simulation and site recurrence."""

from .errors import QWalkError
from .walkmodel import (
    CoinPair,
    LatticeDensity,
    SpinorField,
    bitflip,
    diag_trichotomy,
    hadamard,
    preset,
    sec7,
    validate_coin_pair,
)

__all__ = [
    "CoinPair",
    "LatticeDensity",
    "QWalkError",
    "SpinorField",
    "bitflip",
    "diag_trichotomy",
    "hadamard",
    "preset",
    "sec7",
    "validate_coin_pair",
]

__version__ = "0.1.0"
