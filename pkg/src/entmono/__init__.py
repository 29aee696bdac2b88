"""Entanglement measures and monogamy checks for small quantum systems.

Submodules
----------
linalg
    Partial traces, Hermitian eigensolvers and matrix functions.
states
    Validated states, Schmidt decomposition and seeded random samplers.
measures
    Entropy of entanglement, concurrence, entanglement of formation and
    relative entropy of entanglement.
monogamy
    CKW checks, power-mean exponent search and scan reports.
protocols
    Projective measurements, teleportation and Bell-pair conversion.
"""

from . import linalg, measures, monogamy, protocols, states
from .errors import EntmonoError
from .measures import MeasureResult, Method, OptimizerConfig
from .states import QuantumState, validate

__version__ = "0.1.0"

__all__ = [
    "EntmonoError",
    "MeasureResult",
    "Method",
    "OptimizerConfig",
    "QuantumState",
    "linalg",
    "measures",
    "monogamy",
    "protocols",
    "states",
    "validate",
]
